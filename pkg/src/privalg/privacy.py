"""Privacy and correctability of subalgebras, with constructive recovery.

``N`` is private for ``E`` (w.r.t. ``P``) when ``C_P o E(M)`` lies in ``N'``,
and correctable when some channel ``R: N -> M`` has ``C_P o E o R = id_N``.
Correctability is decided through the complement: ``N`` is correctable for
``E`` exactly when it is private for a complement of ``C_P o E``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraError, VNAlgebra, commutant, contains, generate, subspace_distance
from .channel import (
    Channel,
    ChannelError,
    StinespringTriple,
    complement,
    compose,
    compress,
    intertwiner,
    minimal_stinespring,
    mix,
)
from .numerics import Tolerances, _tol, as_matrix, dag, hs_norm, nullspace, op_norm, orthonormal_span


class PrivacyError(ValueError):
    """Invalid input for a privacy/correctability question."""


class LiftingError(PrivacyError):
    """The commutant-lifting system has no solution."""


class ConsistencyError(RuntimeError):
    """Two routes that must agree did not."""


@dataclass
class PrivacyReport:
    verdict: bool
    residual: float
    witness_index: int
    witness: np.ndarray


@dataclass
class CorrectabilityReport:
    verdict: bool
    residual: float
    witness_index: int
    recovery: Channel | None = None
    homomorphism: Channel | None = None
    achieved_error: float | None = None
    complement: Channel | None = None


@dataclass
class EquivalenceReport:
    correctable: bool
    lifting_failed: bool
    md_dim: int | None
    n_dim: int
    multiplicativity: float | None
    agree: bool


@dataclass
class EpsReport:
    epsilon: float
    achieved: float
    bound: float
    holds: bool
    epsilon_gap: float
    achieved_gap: float
    details: dict = field(default_factory=dict)


def _check_unit(n: VNAlgebra, p: np.ndarray, d: int, tol: Tolerances) -> np.ndarray:
    p = as_matrix(p, "P")
    if p.shape != (d, d) or n.ambient_dim != d:
        raise PrivacyError("channel codomain, algebra and projection dimensions disagree")
    if hs_norm(n.unit - p) > tol.eq_tol * max(1.0, hs_norm(p)):
        raise PrivacyError("unit mismatch: the algebra's unit must equal P")
    return p


def is_private(e: Channel, n: VNAlgebra, p: np.ndarray | None = None,
               tol: Tolerances | None = None) -> PrivacyReport:
    """Test ``C_P o E(X) in N'`` on every basis element ``X`` of the domain."""
    tol = _tol(tol)
    p = n.unit if p is None else p
    p = _check_unit(n, p, e.codomain_dim, tol)
    nprime = commutant(n, tol)
    residuals = []
    for ex in e.action:
        residuals.append(contains(nprime, p @ ex @ p, tol)[1])
    if not residuals:
        return PrivacyReport(True, 0.0, 0, e.domain.basis[0])
    top = max(residuals)
    # first basis element attaining the max, up to rounding
    idx = next(i for i, r in enumerate(residuals) if r >= top - 1e-12 * max(top, 1.0))
    res = float(residuals[idx])
    return PrivacyReport(res < tol.membership_tol, res, idx, e.domain.basis[idx])


def unitalize(f: Channel, omega: np.ndarray, unit: np.ndarray | None = None) -> Channel:
    """``F~(X) = F(X) + <X, omega> (1 - F(1))`` for a normal state ``omega``.

    ``unit`` is the target unit ``1``; it defaults to ``F``'s codomain unit.
    """
    unit = f.codomain_unit if unit is None else unit
    defect = unit - f.apply(f.domain.unit)
    weights = np.einsum("kij,ji->k", f.domain.basis, omega)
    action = f.action + weights[:, None, None] * defect[None]
    return Channel(f.domain, action, codomain_unit=unit, tol=f.tol)


def maximally_mixed(p: np.ndarray) -> np.ndarray:
    return p / np.trace(p).real


def _basis_residual(chan: Channel, n: VNAlgebra) -> float:
    return float(max(op_norm(c - b) for c, b in zip(chan.apply_many(n.basis), n.basis)))


def multiplicativity_residual(r: Channel, n: VNAlgebra) -> float:
    imgs = r.apply_many(n.basis)
    worst = 0.0
    for i, a in enumerate(n.basis):
        for j, b in enumerate(n.basis):
            worst = max(worst, op_norm(r.apply(a @ b) - imgs[i] @ imgs[j]))
    return float(worst)


def recovery_via_lifting(f: Channel, n: VNAlgebra, tol: Tolerances | None = None,
                         triple: StinespringTriple | None = None) -> Channel:
    """``*``-homomorphism ``rho: N -> pi_F(A)'`` with ``rho(T) V_F = V_F T``.

    ``(pi_F, V_F)`` is a minimal dilation of ``F``, so ``rho`` lands in the
    domain of ``F``'s complement and ``F^c o rho = id_N``.  The returned
    channel carries the triple in ``meta["triple"]``.
    """
    tol = _tol(tol)
    if triple is None:
        triple = minimal_stinespring(f, tol=tol)
    v = triple.V
    comm = triple.commutant_algebra()
    # columns: vec(C_b V) for the commutant basis C_b
    lhs = np.einsum("bij,jk->ikb", comm.basis, v).reshape(-1, comm.dim)
    rhs = np.einsum("ij,tjk->ikt", v, n.basis).reshape(-1, n.dim)
    coeffs, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    res = np.linalg.norm(lhs @ coeffs - rhs, axis=0) / np.maximum(np.linalg.norm(rhs, axis=0), 1e-300)
    worst = float(res.max()) if res.size else 0.0
    if worst > tol.membership_tol:
        raise LiftingError(f"lifting failed (relative residual {worst:.2e})")
    images = np.einsum("bt,bij->tij", coeffs, comm.basis)
    rho = Channel(n, images, codomain_unit=np.eye(triple.H_dim), tol=tol, check_cp=False,
                  check_unital=False, meta={"triple": triple, "lifting_residual": worst})
    fc = np.einsum("ji,tjk,kl->til", v.conj(), images, v)
    rho.meta["recovery_residual"] = float(max(op_norm(a - b) for a, b in zip(fc, n.basis)))
    # the solution is unique, so a non-* or non-multiplicative one means no lift exists
    star = max(op_norm(rho.apply(dag(b)) - dag(y)) for b, y in zip(n.basis, images))
    rho.meta["multiplicativity"] = multiplicativity_residual(rho, n)
    if star > 1e-8 or rho.meta["multiplicativity"] > 1e-8:
        raise LiftingError(f"lifting failed (adjoint defect {star:.2e}, "
                           f"multiplicativity defect {rho.meta['multiplicativity']:.2e})")
    return rho


def is_correctable(e: Channel, n: VNAlgebra, p: np.ndarray | None = None,
                   tol: Tolerances | None = None) -> CorrectabilityReport:
    """Decide correctability via privacy of the minimal complement of ``C_P o E``.

    When correctable, the recovery is built by lifting through the complement,
    pulled back to ``M`` and unitalized with the maximally mixed state on
    ``P``; it is then checked directly against ``C_P o E o R = id_N``.
    """
    tol = _tol(tol)
    p = n.unit if p is None else p
    p = _check_unit(n, p, e.codomain_dim, tol)
    g = compress(p, e, tol)
    t_e = minimal_stinespring(g, tol=tol)
    fc = complement(t_e, tol)
    priv = is_private(fc, n, p, tol)
    report = CorrectabilityReport(priv.verdict, priv.residual, priv.witness_index, complement=fc)
    if not priv.verdict:
        return report
    try:
        rho = recovery_via_lifting(fc, n, tol)
    except LiftingError as exc:
        raise ConsistencyError(f"complement is private but {exc}") from exc
    t_f = rho.meta["triple"]
    u = intertwiner(t_f, fc.dilation)
    w = fc.domain.structure().change_of_basis
    transport = w @ u
    hom_images = np.array([t_e.pi_inverse(transport @ y @ dag(transport)) for y in rho.action])
    hom = Channel(n, hom_images, codomain_unit=e.domain.unit, tol=tol, check_cp=False, check_unital=False)
    recovery = unitalize(hom, maximally_mixed(p), unit=e.domain.unit)
    achieved = _basis_residual(compose(g, recovery), n)
    if achieved > tol.eq_tol:
        raise ConsistencyError(f"constructed recovery misses the identity by {achieved:.2e}")
    report.recovery = recovery
    report.homomorphism = hom
    report.achieved_error = achieved
    return report


def multiplicative_domain(e: Channel, pi: Channel, p: np.ndarray | None = None,
                          tol: Tolerances | None = None) -> VNAlgebra:
    """``{T in N : G(X) T = G(X pi(T)),  T G(X) = G(pi(T) X)  for all X}`` with ``G = C_P o E``."""
    tol = _tol(tol)
    n = pi.domain
    p = n.unit if p is None else p
    p = _check_unit(n, p, e.codomain_dim, tol)
    mult = multiplicativity_residual(pi, n)
    if mult > 1e-8:
        raise PrivacyError(f"pi is not multiplicative (residual {mult:.2e})")
    g = compress(p, e, tol)
    gx = g.action
    cols = []
    for t, pt in zip(n.basis, pi.action):
        right = g.apply_many(np.einsum("kij,jl->kil", e.domain.basis, pt))
        left = g.apply_many(np.einsum("ij,kjl->kil", pt, e.domain.basis))
        eq1 = np.einsum("kij,jl->kil", gx, t) - right
        eq2 = np.einsum("ij,kjl->kil", t, gx) - left
        cols.append(np.concatenate([eq1.ravel(), eq2.ravel()]))
    mat = np.stack(cols, axis=1)
    null = nullspace(mat, tol)
    elems = orthonormal_span(np.einsum("rk,kij->rij", null, n.basis), tol) if null.shape[0] else []
    if len(elems) == 0:
        raise AlgebraError("multiplicative domain is empty (pi not unital on P?)")
    md = VNAlgebra(elems, p)
    closed = generate(list(elems), n.ambient_dim, p, tol)
    if closed.dim != md.dim:
        raise AlgebraError("multiplicative domain is not closed under products")
    if not contains(md, p, tol)[0]:
        raise AlgebraError("multiplicative domain does not contain the unit")
    return md


def check_correctability_equivalence(e: Channel, n: VNAlgebra, p: np.ndarray | None = None,
                                     tol: Tolerances | None = None) -> EquivalenceReport:
    """Cross-check the complement route against the multiplicative-domain route."""
    tol = _tol(tol)
    p = n.unit if p is None else p
    rep = is_correctable(e, n, p, tol)
    if rep.verdict:
        md = multiplicative_domain(e, rep.homomorphism, p, tol)
        agree = md.dim == n.dim and subspace_distance(md, n) < tol.membership_tol
        out = EquivalenceReport(True, False, md.dim, n.dim,
                                multiplicativity_residual(rep.homomorphism, n), agree)
    else:
        try:
            recovery_via_lifting(rep.complement, n, tol)
            failed = False
        except LiftingError:
            failed = True
        out = EquivalenceReport(False, failed, None, n.dim, None, failed)
    if not out.agree:
        raise ConsistencyError(f"routes disagree: {out}")
    return out


def _stack_triples(t_e: StinespringTriple, t_g: StinespringTriple, t: float):
    """Common dilation of ``E`` and ``(1-t)E + tG`` with multiplicities ``m_E + m_G``."""
    st = t_e.structure
    rows_e, rows_f, mults = [], [], []
    d = t_e.V.shape[1]
    for k, (a, _) in enumerate(st.blocks):
        me, mg = t_e.multiplicities[k], t_g.multiplicities[k]
        ve = t_e.V[t_e.block_rows(k)].reshape(a, me, d)
        vg = t_g.V[t_g.block_rows(k)].reshape(a, mg, d)
        rows_e.append(np.concatenate([ve, np.zeros_like(vg)], axis=1).reshape(a * (me + mg), d))
        rows_f.append(np.concatenate([np.sqrt(1 - t) * ve, np.sqrt(t) * vg], axis=1).reshape(a * (me + mg), d))
        mults.append(me + mg)
    mults = tuple(mults)
    return (StinespringTriple(st, mults, np.vstack(rows_e)),
            StinespringTriple(st, mults, np.vstack(rows_f)))


def check_eps_bound(e_exact: Channel, g: Channel, t: float, n: VNAlgebra, p: np.ndarray | None = None,
                    tol: Tolerances | None = None) -> EpsReport:
    """Verify the ``2 sqrt(eps)`` correctability bound on ``F' = (1-t)E + tG``.

    ``eps`` is the cb distance between ``F'`` and ``E``.  The complement of
    ``F'`` is taken in a dilation shared with ``E``; the recovery is the lift
    for ``E`` moved into that dilation and unitalized with the maximally
    mixed state ``P / tr P`` on ``N``.
    """
    from .cbnorm import cb_distance_report, cb_norm_report

    tol = _tol(tol)
    p = n.unit if p is None else p
    p = _check_unit(n, p, e_exact.codomain_dim, tol)
    if not 0.0 <= t < 1.0:
        raise PrivacyError("t must lie in [0, 1)")
    priv = is_private(e_exact, n, p, tol)
    if not priv.verdict:
        raise PrivacyError(f"N is not private for the exact channel (residual {priv.residual:.2e})")
    e_c = compress(p, e_exact, tol)
    g_c = compress(p, g, tol)
    f_prime = mix(e_c, g_c, t, tol)
    eps_sol = cb_distance_report(f_prime, e_c, tol)
    eps = max(eps_sol.value, 0.0)
    st = e_c.domain.structure()
    t_e = minimal_stinespring(e_c, st, tol)
    t_g = minimal_stinespring(g_c, st, tol)
    t_e2, t_f = _stack_triples(t_e, t_g, t)
    rho = recovery_via_lifting(e_c, n, tol, triple=t_e)
    u = intertwiner(t_e, t_e2)
    h = t_f.H_dim
    weights = np.einsum("tij,ji->t", n.basis, maximally_mixed(p))
    fill = np.eye(h) - u @ dag(u)
    r_images = np.array([u @ y @ dag(u) + w * fill for y, w in zip(rho.action, weights)])
    vf = t_f.V
    composed = np.einsum("ji,tjk,kl->til", vf.conj(), r_images, vf)
    diff = composed - n.basis
    ach = cb_norm_report(n, diff, tol)
    bound = 2.0 * np.sqrt(eps)
    holds = ach.value <= bound + tol.sdp_tol
    return EpsReport(eps, ach.value, bound, bool(holds), eps_sol.gap, ach.gap,
                     {"t": t, "dilation_dim": h})
