"""Heisenberg-picture channels ``E: M -> B(C^d)`` with ``M`` a subalgebra of ``B(C^{d'})``.

Kraus operators ``K_i: C^d -> C^{d'}`` describe the pre-adjoint ``E_*`` and act
as ``E(X) = sum_i K_i^* X K_i``; trace preservation of ``E_*`` is
``sum_i K_i^* K_i = I_d``.  The Choi matrix is the Schrodinger one,
``J = sum_ij |i><j| (x) E_*(|i><j|)`` on ``C^d (x) C^{d'}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    BlockStructure,
    VNAlgebra,
    block_algebra,
    full_algebra,
    subspace_distance,
    tensor_algebra,
)
from .numerics import (
    Tolerances,
    _tol,
    as_matrix,
    dag,
    hs_norm,
    is_projection,
    op_norm,
)


class ChannelError(ValueError):
    """Raised when data does not describe a (normal unital) CP map."""


def choi_from_action(action: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    """Schrodinger Choi matrix from the Heisenberg images of the matrix units.

    ``action[a*d_in+b] = E(e_ab)`` for ``E: B(C^{d_in}) -> B(C^{d_out})``; the
    result lives on ``C^{d_out} (x) C^{d_in}``.
    """
    act = np.asarray(action).reshape(d_in, d_in, d_out, d_out)
    return act.transpose(3, 1, 2, 0).reshape(d_out * d_in, d_out * d_in)


def action_from_choi(j: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    t = np.asarray(j).reshape(d_out, d_in, d_out, d_in)
    return t.transpose(3, 1, 2, 0).reshape(d_in * d_in, d_out, d_out)


def _block_choi(structure: BlockStructure, k: int, apply: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """``[Phi_k(e_ij)]_ij`` for ``Phi_k(Y) = E(W_k (Y (x) I_b) W_k^*)``."""
    a, b = structure.blocks[k]
    wk = structure.columns(k)
    rows = []
    for i in range(a):
        row = []
        for j in range(a):
            e = np.zeros((a, a), dtype=complex)
            e[i, j] = 1.0
            row.append(apply(wk @ np.kron(e, np.eye(b)) @ dag(wk)))
        rows.append(row)
    return np.block(rows)


class Channel:
    """Normal unital CP map stored by its values on the domain basis.

    ``codomain_unit`` is usually ``I_d``; compressions ``C_P o E`` carry the
    projection ``P`` instead.
    """

    def __init__(self, domain: VNAlgebra, action, *, codomain_unit=None, kraus=None,
                 tol: Tolerances | None = None, check_unital: bool = True, check_cp: bool = True,
                 meta: dict | None = None):
        tol = _tol(tol)
        action = np.asarray(action, dtype=complex)
        if action.ndim != 3 or action.shape[0] != domain.dim or action.shape[1] != action.shape[2]:
            raise ChannelError(f"action of shape {action.shape} does not match a domain of dim {domain.dim}")
        self.domain = domain
        self.action = action
        self.codomain_dim = action.shape[1]
        d = self.codomain_dim
        self.codomain_unit = np.eye(d, dtype=complex) if codomain_unit is None else as_matrix(codomain_unit)
        self._kraus = None if kraus is None else [np.asarray(k, dtype=complex) for k in kraus]
        self.meta = dict(meta or {})
        self.dilation: StinespringTriple | None = None
        self.tol = tol
        if check_unital and self.unitality_residual > tol.eq_tol * max(1.0, op_norm(self.codomain_unit)):
            raise ChannelError(f"not unital (residual {self.unitality_residual:.2e})")
        if check_cp:
            worst = self.cp_violation()
            if worst > tol.eq_tol:
                raise ChannelError(f"not completely positive (eigenvalue {-worst:.2e})")

    def __repr__(self) -> str:
        return f"Channel(domain=B(C^{self.domain.ambient_dim}) dim {self.domain.dim}, codomain_dim={self.codomain_dim})"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.apply(x)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("k,kij->ij", self.domain.coefficients(np.asarray(x, dtype=complex)), self.action)

    def apply_many(self, xs: np.ndarray) -> np.ndarray:
        coeffs = np.einsum("kij,nij->nk", self.domain.basis.conj(), np.asarray(xs, dtype=complex))
        return np.einsum("nk,kij->nij", coeffs, self.action)

    @property
    def unitality_residual(self) -> float:
        return op_norm(self.apply(self.domain.unit) - self.codomain_unit)

    def cp_violation(self) -> float:
        """Largest negative eigenvalue magnitude over the block Choi matrices."""
        st = self.domain.structure()
        worst = 0.0
        for k in range(len(st.blocks)):
            c = _block_choi(st, k, self.apply)
            scale = max(1.0, op_norm(c))
            w = np.linalg.eigvalsh((c + dag(c)) / 2)
            worst = max(worst, -w[0] / scale)
        return float(worst)

    @property
    def is_full_domain(self) -> bool:
        return self.domain.is_full() and np.allclose(self.domain.unit, np.eye(self.domain.ambient_dim))

    @property
    def kraus(self) -> list[np.ndarray] | None:
        if self._kraus is None and self.is_full_domain:
            self._kraus = minimal_stinespring(self).kraus()
        return self._kraus

    def on_matrix_units(self) -> np.ndarray:
        """Images of the matrix units of ``B(C^{d'})``; needs a full domain."""
        if not self.is_full_domain:
            raise ChannelError("matrix-unit form needs the full domain B(C^d')")
        return self.apply_many(full_algebra(self.domain.ambient_dim).basis)

    def distance(self, other: "Channel") -> float:
        """Max operator-norm discrepancy over this channel's domain basis."""
        if other.codomain_dim != self.codomain_dim:
            return np.inf
        return float(max(op_norm(a - b) for a, b in zip(self.action, other.apply_many(self.domain.basis))))


def from_action(domain: VNAlgebra, fn: Callable[[np.ndarray], np.ndarray], **kw) -> Channel:
    return Channel(domain, np.array([fn(b) for b in domain.basis]), **kw)


def from_kraus(kraus: Sequence[np.ndarray], domain_dim: int | None = None,
               tol: Tolerances | None = None) -> Channel:
    """Channel ``X -> sum K_i^* X K_i`` on ``B(C^{d'})`` from ``K_i: C^d -> C^{d'}``.

    >>> Z = np.diag([1.0, -1.0])
    >>> E = from_kraus([np.eye(2) / np.sqrt(2), Z / np.sqrt(2)])
    >>> np.allclose(E(np.array([[0, 1], [0, 0]])), 0)
    True
    """
    tol = _tol(tol)
    if len(kraus) == 0:
        raise ChannelError("empty Kraus list")
    ks = np.array([as_matrix(k, "Kraus operator") for k in kraus])
    if ks.ndim != 3 or len({k.shape for k in ks}) != 1:
        raise ChannelError("Kraus operators must share a shape")
    dp, d = ks.shape[1:]
    if domain_dim is not None and domain_dim != dp:
        raise ChannelError(f"Kraus operators map into C^{dp}, expected C^{domain_dim}")
    tp = np.einsum("kai,kaj->ij", ks.conj(), ks)
    if hs_norm(tp - np.eye(d)) > tol.eq_tol * max(1.0, np.sqrt(d)):
        raise ChannelError("not trace preserving")
    action = np.einsum("iap,ibq->abpq", ks.conj(), ks).reshape(dp * dp, d, d)
    return Channel(full_algebra(dp), action, kraus=list(ks), tol=tol, check_cp=False)


def choi(e: Channel) -> np.ndarray:
    return choi_from_action(e.on_matrix_units(), e.domain.ambient_dim, e.codomain_dim)


def from_choi(c: np.ndarray, dims: tuple[int, int], tol: Tolerances | None = None) -> Channel:
    """Inverse of :func:`choi`; ``dims = (d, d')`` with ``J`` on ``C^d (x) C^{d'}``."""
    tol = _tol(tol)
    d, dp = dims
    c = as_matrix(c, "Choi matrix")
    if c.shape != (d * dp, d * dp):
        raise ChannelError(f"Choi matrix of shape {c.shape} does not match dims {dims}")
    scale = max(1.0, op_norm(c))
    if hs_norm(c - dag(c)) > tol.eq_tol * scale:
        raise ChannelError("not completely positive (Choi matrix not Hermitian)")
    w = np.linalg.eigvalsh((c + dag(c)) / 2)
    if w[0] < -tol.eq_tol * scale:
        raise ChannelError(f"not completely positive (eigenvalue {w[0]:.2e})")
    marg = np.einsum("iaja->ij", c.reshape(d, dp, d, dp))
    if hs_norm(marg - np.eye(d)) > tol.eq_tol * max(1.0, np.sqrt(d)):
        raise ChannelError("not trace preserving")
    return Channel(full_algebra(dp), action_from_choi(c, dp, d), tol=tol, check_cp=False)


def identity_channel(d: int) -> Channel:
    return from_kraus([np.eye(d)])


def depolarizing(d: int) -> Channel:
    """Completely depolarizing channel, ``E(X) = tr(X) I / d``."""
    ks = []
    for a in range(d):
        for b in range(d):
            k = np.zeros((d, d))
            k[a, b] = 1.0 / np.sqrt(d)
            ks.append(k)
    return from_kraus(ks)


def unitary_channel(u: np.ndarray) -> Channel:
    """``X -> u^* X u``."""
    return from_kraus([u])


@dataclass(frozen=True, eq=False)
class StinespringTriple:
    """``E(X) = V^* pi(X) V`` with ``pi(X) = (+)_k X_k (x) I_{m_k}``.

    Rows of ``V`` are ordered block by block, and inside block ``k`` the pair
    (matrix index ``i``, environment index ``l``) sits at ``i * m_k + l``.
    Blocks with ``m_k = 0`` take no rows.
    """

    structure: BlockStructure
    multiplicities: tuple[int, ...]
    V: np.ndarray

    @property
    def H_dim(self) -> int:
        return self.V.shape[0]

    @property
    def env_blocks(self) -> list[tuple[int, int]]:
        return [(a, m) for (a, _), m in zip(self.structure.blocks, self.multiplicities)]

    def _offsets(self) -> list[int]:
        out, pos = [], 0
        for a, m in self.env_blocks:
            out.append(pos)
            pos += a * m
        return out

    def block_rows(self, k: int) -> slice:
        a, m = self.env_blocks[k]
        start = self._offsets()[k]
        return slice(start, start + a * m)

    def pi(self, x: np.ndarray) -> np.ndarray:
        h = self.H_dim
        out = np.zeros((h, h), dtype=complex)
        for k, part in enumerate(self.structure.extract(x)):
            m = self.multiplicities[k]
            if m:
                s = self.block_rows(k)
                out[s, s] = np.kron(part, np.eye(m))
        return out

    def pi_inverse(self, y: np.ndarray) -> np.ndarray:
        """Element ``X`` of the domain with ``pi(X)`` nearest to ``y`` blockwise."""
        parts = []
        for k, (a, m) in enumerate(self.env_blocks):
            if m == 0:
                parts.append(np.zeros((a, a), dtype=complex))
                continue
            s = self.block_rows(k)
            parts.append(np.einsum("iljl->ij", y[s, s].reshape(a, m, a, m)) / m)
        return self.structure.embed(parts)

    def commutant_algebra(self) -> VNAlgebra:
        """``pi(M)' = (+)_k I_{a_k} (x) B(C^{m_k})`` with its block structure."""
        h = self.H_dim
        cols, blocks = [], []
        for k, (a, m) in enumerate(self.env_blocks):
            if m == 0:
                continue
            off = self._offsets()[k]
            perm = np.zeros((h, a * m))
            for i in range(a):
                for l in range(m):
                    perm[off + i * m + l, l * a + i] = 1.0
            cols.append(perm)
            blocks.append((m, a))
        return block_algebra(blocks, np.hstack(cols))

    def kraus(self) -> list[np.ndarray]:
        """Kraus operators; only meaningful for a single full block."""
        if len(self.structure.blocks) != 1 or self.structure.blocks[0][1] != 1:
            raise ChannelError("Kraus form needs a full-algebra domain")
        a = self.structure.blocks[0][0]
        m = self.multiplicities[0]
        w = self.structure.change_of_basis
        v = self.V.reshape(a, m, -1)
        return [w @ v[:, l, :] for l in range(m)]

    def channel_residual(self, e: Channel) -> float:
        return float(max(op_norm(dag(self.V) @ self.pi(b) @ self.V - eb)
                         for b, eb in zip(e.domain.basis, e.action)))

    def is_minimal(self, tol: Tolerances | None = None) -> bool:
        tol = _tol(tol)
        if self.H_dim == 0:
            return True
        stack = np.hstack([self.pi(b) @ self.V for b in self.structure_basis()])
        s = np.linalg.svd(stack, compute_uv=False)
        return int(np.sum(s > tol.rank_tol * s[0])) == self.H_dim

    def structure_basis(self) -> list[np.ndarray]:
        out = []
        for k, (a, b) in enumerate(self.structure.blocks):
            wk = self.structure.columns(k)
            for i in range(a):
                for j in range(a):
                    e = np.zeros((a, a), dtype=complex)
                    e[i, j] = 1.0
                    out.append(wk @ np.kron(e, np.eye(b)) @ dag(wk))
        return out


def minimal_stinespring(e: Channel, structure: BlockStructure | None = None,
                        tol: Tolerances | None = None) -> StinespringTriple:
    """Minimal dilation, built block by block from the block Choi matrices.

    Eigenvalues below ``rank_tol`` times the largest one are discarded.
    """
    tol = _tol(tol if tol is not None else e.tol)
    st = e.domain.structure() if structure is None else structure
    d = e.codomain_dim
    chois = [_block_choi(st, k, e.apply) for k in range(len(st.blocks))]
    spectra = [np.linalg.eigh((c + dag(c)) / 2) for c in chois]
    top = max((float(w[-1]) for w, _ in spectra), default=0.0)
    mults, rows = [], []
    for (a, _), (w, v) in zip(st.blocks, spectra):
        if w[0] < -tol.eq_tol * max(1.0, top):
            raise ChannelError(f"not completely positive (eigenvalue {w[0]:.2e})")
        keep = np.where(w > tol.rank_tol * max(top, 1e-300))[0][::-1]
        m = len(keep)
        vk = np.zeros((a * m, d), dtype=complex)
        for l, idx in enumerate(keep):
            u = np.sqrt(w[idx]) * v[:, idx]
            for i in range(a):
                vk[i * m + l, :] = np.conj(u[i * d:(i + 1) * d])
        mults.append(m)
        rows.append(vk)
    v = np.vstack(rows) if rows else np.zeros((0, d), dtype=complex)
    return StinespringTriple(st, tuple(mults), v)


def complement(triple: StinespringTriple, tol: Tolerances | None = None) -> Channel:
    """``E^c(Y) = V^* Y V`` on ``pi(M)'``.

    The returned channel carries ``.dilation``: the triple ``(id, V)`` written
    in the block coordinates of ``pi(M)'``, whose commutant is ``pi(M)``.
    """
    dom = triple.commutant_algebra()
    v = triple.V
    action = np.einsum("ji,kjl,lm->kim", v.conj(), dom.basis, v)
    out = Channel(dom, action, codomain_unit=dag(v) @ v, tol=tol)
    dst = dom.structure()
    out.dilation = StinespringTriple(dst, tuple(a for (_, a) in dst.blocks),
                                     dag(dst.change_of_basis) @ v)
    return out


def standard_form(e: Channel) -> Channel:
    """The same map written on the reduced algebra ``(+)_k M_{a_k}``.

    For a single block this is an ordinary channel on ``B(C^{a})``; for a
    complement of a channel on ``B(C^{d'})`` that is ``B(C^e)``.
    """
    st = e.domain.structure()
    dr = st.reduced_dim
    if len(st.blocks) == 1:
        dom = full_algebra(dr)
    else:
        dom = block_algebra([(a, 1) for a, _ in st.blocks], np.eye(dr, dtype=complex))
    action = e.apply_many(np.array([st.lift(b) for b in dom.basis]))
    return Channel(dom, action, codomain_unit=e.codomain_unit, tol=e.tol)


def intertwiner(t1: StinespringTriple, t2: StinespringTriple, tol: Tolerances | None = None,
                check: bool = True) -> np.ndarray:
    """Partial isometry ``U = (+)_k I_{a_k} (x) u_k`` with ``U V_1 = V_2``.

    Both triples must dilate the same channel over the same block structure;
    when several solutions exist the least-squares one is returned.
    """
    if t1.structure.blocks != t2.structure.blocks:
        raise ChannelError("triples use different block structures")
    d = t1.V.shape[1]
    u = np.zeros((t2.H_dim, t1.H_dim), dtype=complex)
    for k, (a, _) in enumerate(t1.structure.blocks):
        m1, m2 = t1.multiplicities[k], t2.multiplicities[k]
        if m1 == 0 or m2 == 0:
            continue
        v1 = t1.V[t1.block_rows(k)].reshape(a, m1, d).transpose(1, 0, 2).reshape(m1, a * d)
        v2 = t2.V[t2.block_rows(k)].reshape(a, m2, d).transpose(1, 0, 2).reshape(m2, a * d)
        uk = np.linalg.lstsq(v1.T, v2.T, rcond=None)[0].T
        u[t2.block_rows(k), t1.block_rows(k)] = np.kron(np.eye(a), uk)
    if check:
        res = op_norm(u @ t1.V - t2.V)
        if res > 1e-8 * max(1.0, op_norm(t2.V)):
            raise ChannelError(f"no intertwiner (residual {res:.2e})")
    return u


def compose(e: Channel, f: Channel, tol: Tolerances | None = None) -> Channel:
    """``E o F``: first ``F``, then ``E`` in the Heisenberg picture."""
    if f.codomain_dim != e.domain.ambient_dim:
        raise ChannelError("dimension mismatch in composition")
    if hs_norm(f.codomain_unit - e.domain.unit) > 1e-8:
        raise ChannelError("inner channel does not map the unit onto the outer domain unit")
    return Channel(f.domain, e.apply_many(f.action), codomain_unit=e.codomain_unit,
                   tol=tol or e.tol, check_cp=False)


def tensor(e: Channel, f: Channel, tol: Tolerances | None = None) -> Channel:
    dom = tensor_algebra(e.domain, f.domain)
    action = np.einsum("aij,bkl->abikjl", e.action, f.action).reshape(
        dom.dim, e.codomain_dim * f.codomain_dim, e.codomain_dim * f.codomain_dim)
    return Channel(dom, action, codomain_unit=np.kron(e.codomain_unit, f.codomain_unit),
                   tol=tol or e.tol, check_cp=False)


def conjugate(t: np.ndarray, e: Channel, tol: Tolerances | None = None) -> Channel:
    """``C_T o E``, i.e. ``X -> T E(X) T^*``; ``T`` must be a partial isometry."""
    tol = _tol(tol or e.tol)
    t = as_matrix(t, "T")
    if t.shape[1] != e.codomain_dim:
        raise ChannelError(f"T of shape {t.shape} cannot follow a map into B(C^{e.codomain_dim})")
    unit = t @ e.codomain_unit @ dag(t)
    if not is_projection(unit, tol):
        raise ChannelError("T E(1) T^* is not a projection; T must be a partial isometry")
    action = np.einsum("ij,kjl,ml->kim", t, e.action, t.conj())
    return Channel(e.domain, action, codomain_unit=unit, tol=tol, check_cp=False)


def compress(p: np.ndarray, e: Channel, tol: Tolerances | None = None) -> Channel:
    """``C_P o E`` with codomain ``B(P C^d)`` and unit ``P``."""
    tol = _tol(tol or e.tol)
    p = as_matrix(p, "P")
    if p.shape != (e.codomain_dim, e.codomain_dim):
        raise ChannelError("dimension mismatch between P and the channel codomain")
    if not is_projection(p, tol):
        raise ChannelError("P is not a projection")
    return conjugate(p, e, tol)


def mix(e: Channel, g: Channel, t: float, tol: Tolerances | None = None) -> Channel:
    """``(1 - t) E + t G`` on the domain of ``E``."""
    if not 0.0 <= t <= 1.0:
        raise ChannelError("mixing weight must lie in [0, 1]")
    if subspace_distance(e.domain, g.domain) > 1e-9 or e.codomain_dim != g.codomain_dim:
        raise ChannelError("channels do not share domain and codomain")
    action = (1 - t) * e.action + t * g.apply_many(e.domain.basis)
    return Channel(e.domain, action, codomain_unit=e.codomain_unit, tol=tol or e.tol)


def enlarge(triple: StinespringTriple, extra: int, rng: np.random.Generator) -> StinespringTriple:
    """Non-minimal dilation ``V_k -> (I (x) u_k) V_k`` with random isometries ``u_k``."""
    from .numerics import random_isometry

    d = triple.V.shape[1]
    rows, mults = [], []
    for k, (a, m) in enumerate(triple.env_blocks):
        if m == 0:
            mults.append(0)
            continue
        u = random_isometry(m + extra, m, rng)
        vk = triple.V[triple.block_rows(k)].reshape(a, m, d)
        rows.append(np.einsum("pl,ild->ipd", u, vk).reshape(a * (m + extra), d))
        mults.append(m + extra)
    return StinespringTriple(triple.structure, tuple(mults), np.vstack(rows))
