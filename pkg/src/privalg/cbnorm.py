"""Completely bounded norms of Hermitian-preserving maps.

The cb norm of a Heisenberg map ``Phi`` equals the diamond norm of its
pre-adjoint.  For a Choi matrix ``J`` on ``C^d (x) C^D`` (reference first)
the diamond norm is the value of

    maximize   tr(J (Q0 - Q1))
    subject to Q0, Q1 >= 0,  Q0 + Q1 <= rho (x) I_D,  tr rho = 1,

which is solved here by a small dense primal-dual interior-point method.
A grid of random pure states gives an independent lower bound.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .algebra import VNAlgebra, subspace_distance
from .channel import Channel, ChannelError, choi_from_action
from .numerics import Tolerances, _tol, dag, hs_norm, op_norm

MAX_SDP_DIM = 512


class SDPError(RuntimeError):
    """The interior-point method failed; ``bounds`` holds the best (primal, dual) values."""

    def __init__(self, msg: str, bounds: tuple[float, float] | None = None):
        super().__init__(msg)
        self.bounds = bounds


@dataclass
class SDPProblem:
    """``opt <C, X>`` s.t. ``<A_i, X> = b_i``, ``X >= 0`` block diagonal.

    ``objective`` and every ``constraints[i]`` are dense Hermitian matrices of
    size ``sum(dims)`` that vanish outside the diagonal blocks.
    """

    dims: tuple[int, ...]
    objective: np.ndarray
    constraints: np.ndarray
    rhs: np.ndarray
    sense: str = "min"

    def __post_init__(self):
        n = sum(self.dims)
        if n > MAX_SDP_DIM:
            raise ValueError(f"SDP variable dimension {n} exceeds the limit {MAX_SDP_DIM}")
        self.objective = np.asarray(self.objective, dtype=complex)
        self.constraints = np.asarray(self.constraints, dtype=complex).reshape(-1, n, n)
        self.rhs = np.asarray(self.rhs, dtype=float).ravel()
        if self.objective.shape != (n, n) or self.constraints.shape[0] != self.rhs.size:
            raise ValueError("SDP data shapes are inconsistent")
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        mask = self.block_mask()
        if np.abs(self.objective[~mask]).max(initial=0.0) > 0 or \
                np.abs(self.constraints[:, ~mask]).max(initial=0.0) > 0:
            raise ValueError("SDP data is not block diagonal")

    def block_mask(self) -> np.ndarray:
        n = sum(self.dims)
        mask = np.zeros((n, n), dtype=bool)
        pos = 0
        for k in self.dims:
            mask[pos:pos + k, pos:pos + k] = True
            pos += k
        return mask


@dataclass
class SDPSolution:
    value: float
    primal: np.ndarray
    dual: np.ndarray
    dual_slack: np.ndarray
    gap: float
    primal_value: float
    dual_value: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int
    converged: bool
    info: dict = field(default_factory=dict)


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    try:
        low = np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        return 0.0
    linv = np.linalg.inv(low)
    w = np.linalg.eigvalsh(linv @ dx @ dag(linv))
    return np.inf if w[0] >= 0 else -1.0 / w[0]


def sdp_solve(prob: SDPProblem, gap_tol: float = 1e-9, max_iter: int = 100) -> SDPSolution:
    """Infeasible-start primal-dual path following (HKM direction, Mehrotra corrector).

    >>> p = SDPProblem((2, 1), np.diag([1.0, 1.0, 0.0]), [np.eye(3)], [1.0], sense="max")
    >>> round(sdp_solve(p).value, 8)
    1.0
    """
    n = sum(prob.dims)
    m = prob.rhs.size
    sign = 1.0 if prob.sense == "min" else -1.0
    c = sign * prob.objective
    a = prob.constraints
    b = prob.rhs
    aflat = a.reshape(m, -1)

    def op_a(x):
        return np.real(aflat.conj() @ x.ravel())

    def op_at(y):
        return np.einsum("i,ijk->jk", y, a)

    # Gram matrix of the constraints, used to keep primal steps on A(dx) = rp
    gram = cho_factor(np.real(aflat.conj() @ aflat.T) + 1e-14 * np.eye(m))
    x = np.eye(n, dtype=complex)
    z = np.eye(n, dtype=complex)
    y = np.zeros(m)
    nb = 1.0 + np.linalg.norm(b)
    nc = 1.0 + hs_norm(c)
    converged = False
    best, best_merit, stall = None, np.inf, 0
    it = 0
    for it in range(1, max_iter + 1):
        rp = b - op_a(x)
        rd = c - z - op_at(y)
        pobj = float(np.real(np.vdot(c, x)))
        dobj = float(b @ y)
        pinf = np.linalg.norm(rp) / nb
        dinf = hs_norm(rd) / nc
        gap = abs(pobj - dobj)
        if not np.isfinite(pobj) or np.abs(y).max(initial=0.0) > 1e12 or hs_norm(x) > 1e12:
            raise SDPError("sdp infeasible or unbounded", (sign * pobj, sign * dobj))
        merit = max(gap / (1.0 + abs(pobj)), pinf, dinf)
        if merit < best_merit:
            best, best_merit, stall = (x, y, z, it), merit, 0
        else:
            stall += 1
        if pinf < 1e-9 and dinf < 1e-9 and gap < gap_tol * (1.0 + abs(pobj)):
            converged = True
            break
        # late iterations lose accuracy once Z is badly conditioned
        if stall >= 4:
            break
        mu = float(np.real(np.vdot(x, z))) / n
        zinv = np.linalg.inv(z)
        zinv = (zinv + dag(zinv)) / 2
        bj = x @ a @ zinv
        schur = np.real(aflat.conj() @ bj.reshape(m, -1).T)
        schur = (schur + schur.T) / 2
        try:
            factor = cho_factor(schur)
            solve = lambda r: cho_solve(factor, r)
        except np.linalg.LinAlgError:
            solve = lambda r: np.linalg.lstsq(schur, r, rcond=None)[0]

        def direction(rc):
            rhs = rp - op_a(rc @ zinv - x @ rd @ zinv)
            dy = solve(rhs)
            dz = rd - op_at(dy)
            dx = (rc - x @ dz) @ zinv
            dx = (dx + dag(dx)) / 2
            # the Schur solve degrades as Z becomes singular; restore A(dx) = rp
            dx = dx + op_at(cho_solve(gram, rp - op_a(dx)))
            return dx, dy, dz

        dx_a, dy_a, dz_a = direction(-x @ z)
        ap = min(1.0, _max_step(x, dx_a))
        ad = min(1.0, _max_step(z, dz_a))
        mu_aff = float(np.real(np.vdot(x + ap * dx_a, z + ad * dz_a))) / n
        sigma = min(1.0, (max(mu_aff, 0.0) / mu) ** 3) if mu > 0 else 0.0
        rc = sigma * mu * np.eye(n) - x @ z - dx_a @ dz_a
        dx, dy, dz = direction(rc)
        ap = min(1.0, 0.98 * _max_step(x, dx))
        ad = min(1.0, 0.98 * _max_step(z, dz))
        if ap < 1e-12 and ad < 1e-12:
            break
        x = x + ap * dx
        x = (x + dag(x)) / 2
        y = y + ad * dy
        z = z + ad * dz
        z = (z + dag(z)) / 2
    if not converged and best is not None:
        x, y, z, _ = best
    rp = b - op_a(x)
    rd = c - z - op_at(y)
    pobj = float(np.real(np.vdot(c, x)))
    dobj = float(b @ y)
    return SDPSolution(
        value=sign * pobj, primal=x, dual=y, dual_slack=z, gap=abs(pobj - dobj),
        primal_value=sign * pobj, dual_value=sign * dobj,
        primal_infeasibility=float(np.linalg.norm(rp)), dual_infeasibility=float(hs_norm(rd)),
        iterations=it, converged=converged)


def _hermitian_basis(n: int) -> np.ndarray:
    out = []
    for j in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[j, j] = 1.0
        out.append(e)
    s = 1.0 / np.sqrt(2.0)
    for j in range(n):
        for k in range(j + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = e[k, j] = s
            out.append(e)
            f = np.zeros((n, n), dtype=complex)
            f[j, k], f[k, j] = -1j * s, 1j * s
            out.append(f)
    return np.array(out)


def _embed(blocks: list[np.ndarray]) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    pos = 0
    for blk in blocks:
        k = blk.shape[0]
        out[pos:pos + k, pos:pos + k] = blk
        pos += k
    return out


def diamond_problem(j: np.ndarray, dims: tuple[int, int]) -> SDPProblem:
    """SDP for the diamond norm of the map with Hermitian Choi matrix ``j`` on ``C^d (x) C^D``."""
    d, dd = dims
    n = d * dd
    zn, zd = np.zeros((n, n)), np.zeros((d, d))
    cons, rhs = [], []
    for h in _hermitian_basis(n):
        marg = np.einsum("iaja->ij", h.reshape(d, dd, d, dd))
        cons.append(_embed([h, h, h, -marg]))
        rhs.append(0.0)
    cons.append(_embed([zn, zn, zn, np.eye(d)]))
    rhs.append(1.0)
    obj = _embed([j, -j, zn, zd])
    return SDPProblem((n, n, n, d), obj, np.array(cons), np.array(rhs), sense="max")


def full_matrix_form(domain: VNAlgebra, action: np.ndarray) -> tuple[np.ndarray, int]:
    """Values of the map on the matrix units of ``B(C^D)``, ``D = sum a_k``.

    An element of ``B(C^D)`` is first cut down to its diagonal blocks, which
    is a unital CP projection, so the cb norm does not change.
    """
    st = domain.structure()
    dr = st.reduced_dim
    units = np.eye(dr * dr, dtype=complex).reshape(dr * dr, dr, dr)
    lifted = np.array([st.lift(u) for u in units])
    coeffs = np.einsum("kij,nij->nk", domain.basis.conj(), lifted)
    return np.einsum("nk,kij->nij", coeffs, np.asarray(action, dtype=complex)), dr


def cb_norm_report(domain: VNAlgebra, action: np.ndarray, tol: Tolerances | None = None) -> SDPSolution:
    """cb norm of the Hermitian-preserving map given by its values on ``domain.basis``."""
    tol = _tol(tol)
    action = np.asarray(action, dtype=complex)
    d = action.shape[1]
    units, dr = full_matrix_form(domain, action)
    j = choi_from_action(units, dr, d)
    scale = max(1.0, op_norm(j))
    if hs_norm(j - dag(j)) > 1e-9 * scale:
        raise ChannelError("map is not Hermitian-preserving")
    j = (j + dag(j)) / 2
    if hs_norm(j) == 0.0:
        zero = np.zeros((0, 0))
        return SDPSolution(0.0, zero, np.zeros(0), zero, 0.0, 0.0, 0.0, 0.0, 0.0, 0, True)
    sol = sdp_solve(diamond_problem(j, (d, dr)), gap_tol=min(1e-9, tol.sdp_tol * 1e-2))
    if not sol.converged and sol.gap >= tol.sdp_tol:
        raise SDPError(f"sdp failed (gap {sol.gap:.2e})", (sol.primal_value, sol.dual_value))
    return sol


def cb_norm(domain: VNAlgebra, action: np.ndarray, tol: Tolerances | None = None) -> float:
    return cb_norm_report(domain, action, tol).value


def _difference(e: Channel, f: Channel) -> np.ndarray:
    if e.codomain_dim != f.codomain_dim or subspace_distance(e.domain, f.domain) > 1e-9:
        raise ChannelError("channels do not share domain and codomain")
    return e.action - f.apply_many(e.domain.basis)


def cb_distance_report(e: Channel, f: Channel, tol: Tolerances | None = None) -> SDPSolution:
    return cb_norm_report(e.domain, _difference(e, f), tol)


def cb_distance(e: Channel, f: Channel, tol: Tolerances | None = None) -> float:
    """``||E - F||_cb``, the diamond distance of the pre-adjoints."""
    return cb_distance_report(e, f, tol).value


def _trace_norms(units: np.ndarray, dr: int, d: int, psi: np.ndarray) -> np.ndarray:
    act = units.reshape(dr, dr, d, d)
    out = np.einsum("nrs,qpts,nut->nrpuq", psi, act, psi.conj()).reshape(len(psi), d * dr, d * dr)
    out = (out + dag(out)) / 2
    return np.abs(np.linalg.eigvalsh(out)).sum(axis=1)


def grid_lower_bound(domain: VNAlgebra, action: np.ndarray, n_states: int = 10_000, seed: int = 0,
                     refine: bool = False, batch: int = 2000) -> float:
    """Lower bound ``max_psi ||(id (x) Phi_*)(|psi><psi|)||_1`` over random pure states.

    The outputs are evaluated straight from the Heisenberg action, so this
    bound shares no code path with the Choi matrix or the SDP.
    """
    action = np.asarray(action, dtype=complex)
    d = action.shape[1]
    units, dr = full_matrix_form(domain, action)
    rng = np.random.default_rng(seed)
    best, best_psi = 0.0, None
    done = 0
    while done < n_states:
        k = min(batch, n_states - done)
        psi = rng.standard_normal((k, d, d)) + 1j * rng.standard_normal((k, d, d))
        psi /= np.linalg.norm(psi.reshape(k, -1), axis=1)[:, None, None]
        vals = _trace_norms(units, dr, d, psi)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_psi = float(vals[i]), psi[i]
        done += k
    if refine and best_psi is not None:
        from scipy.optimize import minimize

        def neg(v):
            p = (v[:d * d] + 1j * v[d * d:]).reshape(1, d, d)
            p = p / np.linalg.norm(p)
            return -_trace_norms(units, dr, d, p)[0]

        x0 = np.concatenate([best_psi.real.ravel(), best_psi.imag.ravel()])
        res = minimize(neg, x0, method="Nelder-Mead", options={"maxiter": 2000, "xatol": 1e-10, "fatol": 1e-12})
        best = max(best, -float(res.fun))
    return best
