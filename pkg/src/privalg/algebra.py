"""Finite-dimensional von Neumann algebras represented on ``C^d``.

An algebra is stored as an HS-orthonormal basis together with its unit, a
projection ``P``.  When ``P != I`` the algebra is a unital subalgebra of
``B(P C^d)`` and every commutant is taken inside ``B(P C^d)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .numerics import (
    DEFAULT_TOL,
    Tolerances,
    _tol,
    as_matrix,
    commutation_matrix,
    dag,
    hs_norm,
    is_projection,
    nullspace,
    orthonormal_span,
    range_isometry,
)


class AlgebraError(ValueError):
    """Raised for invalid algebra input or a failed structural computation."""


@dataclass(frozen=True, eq=False)
class BlockStructure:
    """Decomposition ``W^* A W = (+)_k M_{a_k} (x) I_{b_k}``.

    ``change_of_basis`` is a ``d x rank(P)`` isometry whose columns span the
    range of the unit.  Inside block ``k`` the coordinate ``(i, j)`` with
    ``i < a_k`` and ``j < b_k`` sits at offset ``i * b_k + j``.
    """

    blocks: tuple[tuple[int, int], ...]
    change_of_basis: np.ndarray

    @property
    def offsets(self) -> list[int]:
        out, pos = [], 0
        for a, b in self.blocks:
            out.append(pos)
            pos += a * b
        return out

    @property
    def reduced_dim(self) -> int:
        return sum(a for a, _ in self.blocks)

    @property
    def dim(self) -> int:
        return sum(a * a for a, _ in self.blocks)

    def columns(self, k: int) -> np.ndarray:
        a, b = self.blocks[k]
        start = self.offsets[k]
        return self.change_of_basis[:, start:start + a * b]

    def extract(self, x: np.ndarray) -> list[np.ndarray]:
        """Matrix parts ``X_k`` of an element ``X`` of the algebra."""
        parts = []
        for k, (a, b) in enumerate(self.blocks):
            wk = self.columns(k)
            y = (dag(wk) @ x @ wk).reshape(a, b, a, b)
            parts.append(np.einsum("ijkj->ik", y) / b)
        return parts

    def embed(self, parts: Sequence[np.ndarray]) -> np.ndarray:
        d = self.change_of_basis.shape[0]
        out = np.zeros((d, d), dtype=complex)
        for k, (a, b) in enumerate(self.blocks):
            wk = self.columns(k)
            out += wk @ np.kron(parts[k], np.eye(b)) @ dag(wk)
        return out

    def reduce(self, x: np.ndarray) -> np.ndarray:
        """Block-diagonal image of ``X`` in ``B(C^{sum a_k})`` (multiplicities dropped)."""
        dr = self.reduced_dim
        out = np.zeros((dr, dr), dtype=complex)
        pos = 0
        for part in self.extract(x):
            a = part.shape[0]
            out[pos:pos + a, pos:pos + a] = part
            pos += a
        return out

    def lift(self, y: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`reduce`; off-diagonal blocks of ``y`` are ignored."""
        parts, pos = [], 0
        for a, _ in self.blocks:
            parts.append(y[pos:pos + a, pos:pos + a])
            pos += a
        return self.embed(parts)

    def central_projection(self, k: int) -> np.ndarray:
        wk = self.columns(k)
        return wk @ dag(wk)


class VNAlgebra:
    """Unital *-algebra of operators on ``C^d`` with unit ``P``."""

    def __init__(self, basis, unit, *, structure: BlockStructure | None = None,
                 validate: bool = False, tol: Tolerances | None = None):
        basis = np.asarray(basis, dtype=complex)
        unit = as_matrix(unit, "unit")
        d = unit.shape[0]
        if basis.ndim != 3 or basis.shape[1:] != (d, d):
            raise AlgebraError(f"basis of shape {basis.shape} does not match unit of size {d}")
        self.basis = basis
        self.unit = unit
        self.ambient_dim = d
        self._structure = structure
        self._commutant: VNAlgebra | None = None
        if validate:
            self.validate(tol)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __repr__(self) -> str:
        return f"VNAlgebra(dim={self.dim}, ambient_dim={self.ambient_dim})"

    def coefficients(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("kij,ij->k", self.basis.conj(), x)

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("k,kij->ij", self.coefficients(x), self.basis)

    def element(self, coeffs: np.ndarray) -> np.ndarray:
        return np.einsum("k,kij->ij", coeffs, self.basis)

    def validate(self, tol: Tolerances | None = None) -> None:
        tol = _tol(tol)
        if not is_projection(self.unit, tol):
            raise AlgebraError("unit is not a projection")
        gram = np.einsum("aij,bij->ab", self.basis.conj(), self.basis)
        if np.abs(gram - np.eye(self.dim)).max() > 1e-10:
            raise AlgebraError("basis is not HS-orthonormal")
        ok, res = contains(self, self.unit, tol)
        if not ok:
            raise AlgebraError(f"unit not in algebra (residual {res:.2e})")
        for b in self.basis:
            ok, res = contains(self, dag(b), tol)
            if not ok:
                raise AlgebraError(f"algebra not closed under adjoint (residual {res:.2e})")
        prods = np.einsum("aij,bjk->abik", self.basis, self.basis).reshape(-1, self.ambient_dim,
                                                                          self.ambient_dim)
        for p in prods:
            ok, res = contains(self, p, tol)
            if not ok:
                raise AlgebraError(f"algebra not closed under products (residual {res:.2e})")

    def structure(self, seed: int = 0, tol: Tolerances | None = None) -> BlockStructure:
        if self._structure is None:
            self._structure = structure(self, seed=seed, tol=tol)
        return self._structure

    @property
    def has_structure(self) -> bool:
        return self._structure is not None

    def is_full(self) -> bool:
        return self.dim == self.ambient_dim ** 2

    def conjugate(self, u: np.ndarray) -> "VNAlgebra":
        """The algebra ``u^* A u`` for a unitary ``u``."""
        basis = np.einsum("ji,kjl,lm->kim", u.conj(), self.basis, u)
        st = None
        if self._structure is not None:
            st = BlockStructure(self._structure.blocks, dag(u) @ self._structure.change_of_basis)
        return VNAlgebra(basis, dag(u) @ self.unit @ u, structure=st)


def full_algebra(d: int) -> VNAlgebra:
    """``B(C^d)`` with the matrix units ``e_ab`` (index ``a*d+b``) as basis."""
    basis = np.eye(d * d, dtype=complex).reshape(d * d, d, d)
    return VNAlgebra(basis, np.eye(d), structure=BlockStructure(((d, 1),), np.eye(d, dtype=complex)))


def scalars(d: int, unit: np.ndarray | None = None) -> VNAlgebra:
    p = np.eye(d, dtype=complex) if unit is None else as_matrix(unit, "unit")
    r = int(round(np.trace(p).real))
    w = range_isometry(p)
    return VNAlgebra((p / np.sqrt(r))[None], p, structure=BlockStructure(((1, r),), w))


def diagonal_algebra(d: int) -> VNAlgebra:
    basis = np.zeros((d, d, d), dtype=complex)
    for k in range(d):
        basis[k, k, k] = 1.0
    return VNAlgebra(basis, np.eye(d), structure=BlockStructure(tuple((1, 1) for _ in range(d)),
                                                                np.eye(d, dtype=complex)))


def block_algebra(blocks: Sequence[tuple[int, int]], change_of_basis: np.ndarray) -> VNAlgebra:
    """``W ((+)_k M_{a_k} (x) I_{b_k}) W^*`` with its structure attached."""
    st = BlockStructure(tuple((int(a), int(b)) for a, b in blocks), np.asarray(change_of_basis, dtype=complex))
    elems = []
    for k, (a, b) in enumerate(st.blocks):
        wk = st.columns(k)
        for i in range(a):
            for j in range(a):
                e = np.zeros((a, a), dtype=complex)
                e[i, j] = 1.0
                elems.append(wk @ np.kron(e, np.eye(b)) @ dag(wk) / np.sqrt(b))
    w = st.change_of_basis
    return VNAlgebra(np.array(elems), w @ dag(w), structure=st)


def generate(generators: Sequence[np.ndarray], ambient_dim: int, unit: np.ndarray | None = None,
             tol: Tolerances | None = None) -> VNAlgebra:
    """Smallest unital *-algebra with unit ``unit`` containing ``generators``.

    >>> generate([np.diag([1.0, -1.0])], 2).dim
    2
    """
    tol = _tol(tol)
    d = int(ambient_dim)
    p = np.eye(d, dtype=complex) if unit is None else as_matrix(unit, "unit")
    if p.shape != (d, d) or not is_projection(p, tol):
        raise AlgebraError("unit must be a d x d projection")
    gens = []
    for g in generators:
        g = as_matrix(g, "generator")
        if g.shape != (d, d):
            raise AlgebraError(f"generator of shape {g.shape} does not act on C^{d}")
        scale = max(1.0, hs_norm(g))
        if hs_norm(p @ g @ p - g) > tol.eq_tol * scale:
            raise AlgebraError("generator is not supported on the range of the unit")
        gens.append(g)
    current = orthonormal_span([p] + gens + [dag(g) for g in gens], tol)
    for _ in range(d * d):
        k = current.shape[0]
        prods = np.einsum("aij,bjk->abik", current, current).reshape(k * k, d, d)
        nxt = orthonormal_span(np.concatenate([current, dag(current), prods]), tol)
        if nxt.shape[0] == k:
            break
        current = nxt
    return VNAlgebra(current, p)


def _structured_commutant(a: VNAlgebra) -> VNAlgebra:
    st = a.structure()
    w = st.change_of_basis
    cols, blocks = [], []
    for k, (ak, bk) in enumerate(st.blocks):
        wk = st.columns(k)
        # swap tensor order (i, j) -> (j, i) so the commutant reads M_b (x) I_a
        perm = np.zeros((ak * bk, ak * bk))
        for i in range(ak):
            for j in range(bk):
                perm[i * bk + j, j * ak + i] = 1.0
        cols.append(wk @ perm)
        blocks.append((bk, ak))
    return block_algebra(blocks, np.hstack(cols) if cols else w)


def _stacked_nullspace(mats: list[np.ndarray], n: int, tol: Tolerances) -> np.ndarray:
    rows = sum(m.shape[0] for m in mats)
    if rows <= 8192:
        return nullspace(np.concatenate(mats, axis=0) if mats else np.zeros((0, n)), tol)
    # Tall systems: accumulate an R factor, which has the same singular values.
    r = np.zeros((0, n), dtype=complex)
    chunk: list[np.ndarray] = []
    size = 0
    for m in mats:
        chunk.append(m)
        size += m.shape[0]
        if size >= 4 * n:
            r = np.linalg.qr(np.concatenate([r] + chunk, axis=0), mode="r")
            chunk, size = [], 0
    if chunk:
        r = np.linalg.qr(np.concatenate([r] + chunk, axis=0), mode="r")
    return nullspace(r, tol)


def commutant(a: VNAlgebra, tol: Tolerances | None = None) -> VNAlgebra:
    """``{X in B(PS) : XT = TX for all T in A}``.

    Algebras built with a known block structure use the closed form
    ``(+)_k I_{a_k} (x) B(C^{b_k})``; all others solve the commutation system.
    """
    tol = _tol(tol)
    if a._commutant is not None:
        return a._commutant
    if a.has_structure:
        out = _structured_commutant(a)
    else:
        wp = range_isometry(a.unit)
        r = wp.shape[1]
        reduced = np.einsum("ji,kjl,lm->kim", wp.conj(), a.basis, wp)
        mats = [commutation_matrix(t) for t in reduced]
        null = _stacked_nullspace(mats, r * r, tol).reshape(-1, r, r)
        basis = np.einsum("ij,kjl,ml->kim", wp, null, wp.conj())
        out = VNAlgebra(basis, a.unit)
    a._commutant = out
    return out


def center(a: VNAlgebra, tol: Tolerances | None = None) -> VNAlgebra:
    """``A ∩ A'``, solved in the coordinates of A's basis."""
    tol = _tol(tol)
    k = a.dim
    comms = np.einsum("aij,bjk->abik", a.basis, a.basis) - np.einsum("bij,ajk->abik", a.basis, a.basis)
    # column a: vec([B_a, B_b]) stacked over b
    mat = comms.reshape(k, -1).T
    null = nullspace(mat, tol)
    basis = np.einsum("ra,aij->rij", null, a.basis)
    return VNAlgebra(orthonormal_span(basis, tol), a.unit)


def is_factor(a: VNAlgebra, tol: Tolerances | None = None) -> bool:
    return center(a, tol).dim == 1


def contains(a: VNAlgebra, x: np.ndarray, tol: Tolerances | None = None) -> tuple[bool, float]:
    """Membership test; the residual is relative to ``max(||X||_HS, 1)``.

    The floor keeps numerically zero inputs (rounding noise) from reporting a
    spurious relative residual of order one.
    """
    tol = _tol(tol)
    x = np.asarray(x, dtype=complex)
    res = hs_norm(x - a.project(x)) / max(hs_norm(x), 1.0)
    return res < tol.membership_tol, float(res)


def subspace_distance(a: VNAlgebra, b: VNAlgebra) -> float:
    """Largest mutual-containment residual between the spans of ``a`` and ``b``."""
    r1 = max((contains(b, x)[1] for x in a.basis), default=0.0)
    r2 = max((contains(a, x)[1] for x in b.basis), default=0.0)
    return max(r1, r2)


def _hermitian_spanning(basis: np.ndarray) -> np.ndarray:
    return np.concatenate([(basis + dag(basis)) / 2, (basis - dag(basis)) / 2j])


def _cluster(values: np.ndarray, scale: float) -> tuple[list[np.ndarray], float]:
    """Group sorted eigenvalues; also returns the smallest gap between groups."""
    thr = 1e-6 * scale
    groups, start = [], 0
    min_gap = np.inf
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > thr:
            groups.append(np.arange(start, i))
            if i < len(values):
                min_gap = min(min_gap, values[i] - values[i - 1])
            start = i
    return groups, float(min_gap)


def _try_structure(a: VNAlgebra, z: VNAlgebra, rng: np.random.Generator) -> BlockStructure | None:
    wp = range_isometry(a.unit)
    herm_z = _hermitian_spanning(z.basis)
    h = np.einsum("k,kij->ij", rng.standard_normal(len(herm_z)), herm_z)
    w, v = np.linalg.eigh(dag(wp) @ h @ wp)
    scale = max(1.0, float(np.abs(w).max()))
    groups, gap = _cluster(w, scale)
    if len(groups) != z.dim or gap < 1e-4 * scale:
        return None
    herm_a = _hermitian_spanning(a.basis)
    xh = np.einsum("k,kij->ij", rng.standard_normal(len(herm_a)), herm_a)
    y = np.einsum("k,kij->ij", rng.standard_normal(a.dim) + 1j * rng.standard_normal(a.dim), a.basis)
    blocks, cols = [], []
    for g in groups:
        uk = wp @ v[:, g]
        wk_vals, wk_vecs = np.linalg.eigh(dag(uk) @ xh @ uk)
        sc = max(1.0, float(np.abs(wk_vals).max()))
        sub, sub_gap = _cluster(wk_vals, sc)
        sizes = {len(s) for s in sub}
        if len(sizes) != 1 or (len(sub) > 1 and sub_gap < 1e-4 * sc):
            return None
        ak, bk = len(sub), sizes.pop()
        fs = [wk_vecs[:, s] for s in sub]
        yk = dag(uk) @ y @ uk
        aligned = [fs[0]]
        for fi in fs[1:]:
            gi = dag(fi) @ yk @ fs[0]
            c = np.sqrt(np.trace(dag(gi) @ gi).real / bk)
            if c < 1e-6:
                return None
            oi = gi / c
            if np.abs(dag(oi) @ oi - np.eye(bk)).max() > 1e-8:
                return None
            aligned.append(fi @ oi)
        blocks.append((ak, bk))
        cols.append(uk @ np.hstack(aligned))
    st = BlockStructure(tuple(blocks), np.hstack(cols))
    if st.dim != a.dim:
        return None
    for b in a.basis:
        if hs_norm(st.embed(st.extract(b)) - b) > 1e-8:
            return None
    return st


def structure(a: VNAlgebra, seed: int = 0, tol: Tolerances | None = None) -> BlockStructure:
    """Block decomposition via generic central and maximal-abelian elements.

    A failed attempt (numerically close eigenvalues) is retried once with a
    fresh random element before giving up.
    """
    if a.has_structure:
        return a._structure
    tol = _tol(tol)
    z = center(a, tol)
    rng = np.random.default_rng(seed)
    for _ in range(2):
        st = _try_structure(a, z, rng)
        if st is not None:
            a._structure = st
            return st
    raise AlgebraError("degenerate center")


def tensor_algebra(a: VNAlgebra, b: VNAlgebra) -> VNAlgebra:
    basis = np.einsum("aij,bkl->abikjl", a.basis, b.basis).reshape(
        a.dim * b.dim, a.ambient_dim * b.ambient_dim, a.ambient_dim * b.ambient_dim)
    return VNAlgebra(basis, np.kron(a.unit, b.unit))


def conditional_expectation(a: VNAlgebra, tol: Tolerances | None = None):
    """HS-orthogonal projection onto ``a`` as a map on ``B(C^d)``.

    The result is a :class:`~privalg.channel.Channel` with codomain unit
    ``P``; a non-positive Choi matrix means ``a`` was not a *-algebra.
    """
    from .channel import Channel, ChannelError

    tol = _tol(tol)
    d = a.ambient_dim
    dom = full_algebra(d)
    action = np.array([a.project(e) for e in dom.basis])
    try:
        return Channel(dom, action, codomain_unit=a.unit, tol=tol)
    except ChannelError as exc:
        raise AlgebraError(f"not an expectation: {exc}") from exc
