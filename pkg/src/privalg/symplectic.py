"""Phase-space calculus for linear bosonic channels.

Vectors in ``R^{2n}`` are interleaved, ``z = (x_1, y_1, ..., x_n, y_n)``, and
``Delta(z, z') = sum_i (x_i y'_i - x'_i y_i)``.  Weyl operators are never
built; a channel is a linear map on labels together with a Gaussian
coefficient, ``E(W(z)) = f(z) W(Kz)`` with ``f(z) = phi_env(K_E z)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag, null_space, orth

from .numerics import DEFAULT_TOL


class SymplecticError(ValueError):
    """Invalid phase-space data."""


def delta(n: int) -> np.ndarray:
    """``Delta_n = (+)_i [[0, 1], [-1, 0]]``."""
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class SymplecticForm:
    n: int

    @property
    def delta(self) -> np.ndarray:
        return delta(self.n)

    def __call__(self, z, zp) -> float:
        return symplectic_form(z, zp, self.n)


def _vec(z, n: int) -> np.ndarray:
    v = np.asarray(z, dtype=float).ravel()
    if v.size != 2 * n:
        raise SymplecticError(f"vector of length {v.size} is not in R^{2 * n}")
    return v


def symplectic_form(z, zp, n: int) -> float:
    """
    >>> symplectic_form([1, 2, 3, 4], [0, 1, 1, 0], 2)
    -3.0
    """
    return float(_vec(z, n) @ delta(n) @ _vec(zp, n))


def symplectic_residual(t: np.ndarray, n: int) -> float:
    t = np.asarray(t, dtype=float)
    if t.shape != (2 * n, 2 * n):
        raise SymplecticError(f"matrix of shape {t.shape} does not act on R^{2 * n}")
    dl = delta(n)
    return float(np.abs(t.T @ dl @ t - dl).max())


def is_symplectic(t: np.ndarray, n: int, tol: float | None = None) -> bool:
    tol = DEFAULT_TOL.eq_tol if tol is None else tol
    return symplectic_residual(t, n) < tol


def symplectic_adjoint(a: np.ndarray, n: int) -> np.ndarray:
    """``A' = Delta^{-1} A^t Delta``, so ``Delta(Az, z') = Delta(z, A'z')``."""
    dl = delta(n)
    return -dl @ np.asarray(a, dtype=float).T @ dl


def complete_to_symplectic(a: np.ndarray, b: np.ndarray, n: int, tol: float | None = None) -> np.ndarray:
    """Canonical completion ``T = [[A, -B'], [B, A']]`` of the first block column.

    Needs ``Delta = A^t Delta A + B^t Delta B`` and ``AB = BA``.
    """
    tol = DEFAULT_TOL.eq_tol if tol is None else tol
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    dl = delta(n)
    form = np.abs(a.T @ dl @ a + b.T @ dl @ b - dl).max()
    comm = np.abs(a @ b - b @ a).max()
    if form > tol or comm > tol:
        raise SymplecticError(f"not completable (canonical form): form defect {form:.2e}, commutator {comm:.2e}")
    return np.block([[a, -symplectic_adjoint(b, n)], [b, symplectic_adjoint(a, n)]])


def weyl_commute(z, zp, n: int, tol: float | None = None) -> bool:
    """``[W(z), W(z')] = 0`` iff ``Delta(z, z')`` is a multiple of ``2 pi``."""
    tol = DEFAULT_TOL.eq_tol if tol is None else tol
    r = np.mod(symplectic_form(z, zp, n), 2 * np.pi)
    return bool(min(r, 2 * np.pi - r) < tol)


@dataclass
class WeylSubalgebraDescriptor:
    """``W(R)''`` for a subspace ``R``; ``basis`` has the spanning vectors as columns."""

    basis: np.ndarray
    n: int
    certificate: float | None = None

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float).reshape(2 * self.n, -1)
        if b.shape[1] and np.linalg.matrix_rank(b, tol=1e-10) != b.shape[1]:
            raise SymplecticError("subspace basis is linearly dependent")
        self.basis = b

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((2 * self.n, 2 * self.n))
        q = orth(self.basis)
        return q @ q.T


def subspace(vectors, n: int) -> WeylSubalgebraDescriptor:
    """Subspace spanned by the given vectors (rows or a list), made independent."""
    v = np.asarray(vectors, dtype=float).reshape(-1, 2 * n).T
    basis = orth(v, rcond=1e-10) if v.size else np.zeros((2 * n, 0))
    return WeylSubalgebraDescriptor(basis, n)


def subspace_residual(r1: WeylSubalgebraDescriptor, r2: WeylSubalgebraDescriptor) -> float:
    """Mutual-containment residual of two subspaces."""
    p1, p2 = r1.projector(), r2.projector()
    res1 = np.abs(r1.basis - p2 @ r1.basis).max(initial=0.0)
    res2 = np.abs(r2.basis - p1 @ r2.basis).max(initial=0.0)
    return float(max(res1, res2))


def symplectic_complement(r: WeylSubalgebraDescriptor, n: int | None = None) -> WeylSubalgebraDescriptor:
    """``R^Delta = {z : Delta(z', z) = 0 for all z' in R}``."""
    n = r.n if n is None else n
    if r.dim == 0:
        return WeylSubalgebraDescriptor(np.eye(2 * n), n)
    rows = r.basis.T @ delta(n)
    return WeylSubalgebraDescriptor(null_space(rows, rcond=1e-10), n)


@dataclass
class GaussianCharFn:
    """``phi(z) = exp(i <m, z> - alpha(z, z) / 2)``."""

    m: np.ndarray
    alpha: np.ndarray
    check: bool = True

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        k = self.alpha.shape[0]
        self.m = np.zeros(k) if self.m is None else np.asarray(self.m, dtype=float).ravel()
        if self.alpha.shape != (k, k) or k % 2 or self.m.size != k:
            raise SymplecticError("covariance must be 2l x 2l with a matching mean")
        if np.abs(self.alpha - self.alpha.T).max() > 1e-12:
            raise SymplecticError("covariance is not symmetric")
        if self.check:
            w = np.linalg.eigvalsh(self.alpha + 0.5j * delta(k // 2))
            if w[0] < -DEFAULT_TOL.eq_tol:
                raise SymplecticError("covariance violates alpha + (i/2) Delta >= 0")

    @property
    def modes(self) -> int:
        return self.alpha.shape[0] // 2

    def __call__(self, z) -> complex:
        z = np.asarray(z, dtype=float).ravel()
        return complex(np.exp(1j * (self.m @ z) - 0.5 * (z @ self.alpha @ z)))

    def direct_sum(self, other: "GaussianCharFn") -> "GaussianCharFn":
        return GaussianCharFn(np.concatenate([self.m, other.m]), block_diag(self.alpha, other.alpha))


def symplectic_eigenvalues(alpha: np.ndarray) -> np.ndarray:
    """Moduli of the eigenvalues of ``i Delta alpha``, one per mode."""
    k = alpha.shape[0] // 2
    w = np.abs(np.linalg.eigvals(1j * delta(k) @ alpha))
    return np.sort(w)[::2]


@dataclass(frozen=True)
class WeylMonomial:
    """``coeff * W(z)``; products follow ``W(z) W(z') = exp(-i Delta(z, z') / 2) W(z + z')``."""

    coeff: complex
    z: np.ndarray

    def __mul__(self, other: "WeylMonomial") -> "WeylMonomial":
        n = self.z.size // 2
        phase = np.exp(-0.5j * symplectic_form(self.z, other.z, n))
        return WeylMonomial(self.coeff * other.coeff * phase, self.z + other.z)


@dataclass
class WeylChannelDescriptor:
    """``E(W(z)) = phi_env(K_E z) W(K z)``."""

    K: np.ndarray
    K_E: np.ndarray
    env: GaussianCharFn
    residual: float = field(init=False, default=0.0)

    def __post_init__(self):
        self.K = np.asarray(self.K, dtype=float)
        self.K_E = np.asarray(self.K_E, dtype=float)
        n2 = self.K.shape[0]
        if self.K.shape != (n2, n2) or n2 % 2 or self.K_E.shape[1] != n2 or self.K_E.shape[0] % 2:
            raise SymplecticError("K must be 2n x 2n and K_E 2l x 2n")
        if self.env.alpha.shape[0] != self.K_E.shape[0]:
            raise SymplecticError("environment covariance does not match K_E")
        n, ell = n2 // 2, self.K_E.shape[0] // 2
        self.residual = float(np.abs(self.K.T @ delta(n) @ self.K + self.K_E.T @ delta(ell) @ self.K_E
                                     - delta(n)).max())
        if self.residual > DEFAULT_TOL.eq_tol:
            raise SymplecticError(f"descriptor is not symplectically dilatable (defect {self.residual:.2e})")

    @property
    def n(self) -> int:
        return self.K.shape[0] // 2

    @property
    def ell(self) -> int:
        return self.K_E.shape[0] // 2

    def f(self, z) -> complex:
        return self.env(self.K_E @ np.asarray(z, dtype=float))

    def apply(self, mono: WeylMonomial) -> WeylMonomial:
        return WeylMonomial(mono.coeff * self.f(mono.z), self.K @ mono.z)

    def dilation(self) -> np.ndarray:
        if self.ell != self.n:
            raise SymplecticError("canonical completion needs as many environment modes as system modes")
        return complete_to_symplectic(self.K, self.K_E, self.n)


def compose(second: WeylChannelDescriptor, first: WeylChannelDescriptor) -> WeylChannelDescriptor:
    """Descriptor of ``second o first`` (``first`` acts on ``W(z)`` first)."""
    k = second.K @ first.K
    ke = np.vstack([first.K_E, second.K_E @ first.K])
    return WeylChannelDescriptor(k, ke, first.env.direct_sum(second.env))


def symplectic_channel(t: np.ndarray) -> WeylChannelDescriptor:
    """Unitary channel ``W(z) -> W(Tz)`` with a vacuum-free trivial environment."""
    n = t.shape[0] // 2
    if not is_symplectic(t, n):
        raise SymplecticError("matrix is not symplectic")
    return WeylChannelDescriptor(t, np.zeros((2, 2 * n)), GaussianCharFn(None, 0.5 * np.eye(2)))


def private_weyl_subalgebra(desc: WeylChannelDescriptor) -> WeylSubalgebraDescriptor:
    """``W(range(K)^Delta)''``, which commutes with every output ``W(Kz)``."""
    n = desc.n
    rng_k = orth(desc.K, rcond=1e-10) if np.abs(desc.K).max(initial=0.0) > 0 else np.zeros((2 * n, 0))
    r = WeylSubalgebraDescriptor(rng_k, n)
    comp = symplectic_complement(r)
    worst = 0.0
    for z in r.basis.T:
        for zp in comp.basis.T:
            val = abs(symplectic_form(z, zp, n))
            worst = max(worst, val)
            if val < DEFAULT_TOL.eq_tol and not weyl_commute(z, zp, n):
                raise SymplecticError("privacy certificate failed")
    comp.certificate = worst
    return comp


def a2_channel(n0: float) -> WeylChannelDescriptor:
    """Single-mode class A2 channel with a thermal environment of mean photon number ``n0``."""
    if n0 < 0:
        raise SymplecticError("N0 must be nonnegative")
    k = np.diag([1.0, 0.0])
    t = complete_to_symplectic(k, np.eye(2), 1)
    return WeylChannelDescriptor(k, t[2:, :2], GaussianCharFn(None, (n0 + 0.5) * np.eye(2)))


def thermal_purification(n0: float) -> GaussianCharFn:
    """Two-mode squeezed purification of the thermal state on ``E (x) E'``.

    In coordinates ``(x_E, y_E, x_E', y_E')`` the covariance is
    ``[[a I, c Z], [c Z, a I]]`` with ``a = n0 + 1/2``, ``c = sqrt(a^2 - 1/4)``
    and ``Z = diag(1, -1)``.
    """
    a = n0 + 0.5
    c = np.sqrt(max(a * a - 0.25, 0.0))
    zed = np.diag([1.0, -1.0])
    cov = np.block([[a * np.eye(2), c * zed], [c * zed, a * np.eye(2)]])
    return GaussianCharFn(None, cov)


def purification_check(n0: float, grid=None) -> dict:
    """Marginal and purity checks for :func:`thermal_purification`."""
    psi = thermal_purification(n0)
    f = a2_channel(n0).env
    grid = [(-2.0, 0.5), (-1.0, -1.0), (-0.3, 0.0), (0.0, 0.0), (0.25, 0.75), (1.0, 2.0), (3.0, -0.1)] \
        if grid is None else grid
    dev = max(abs(psi(np.array([x, y, 0.0, 0.0])) - f(np.array([x, y]))) for x, y in grid)
    nu = symplectic_eigenvalues(psi.alpha)
    return {"marginal_deviation": float(dev), "symplectic_eigenvalues": nu.tolist(),
            "purity_deviation": float(np.abs(nu - 0.5).max())}


def complement_label(t: np.ndarray, n: int, purification: GaussianCharFn, z, zp) -> tuple[complex, np.ndarray]:
    """``E^c(W_{E (x) E'}(z, z'))`` as ``(coefficient, S-label)``.

    With ``T(0, z) = (L z, L_E z)`` the coefficient is ``phi_psi(L_E z, z')``
    and the output is ``W_S(L z)``.
    """
    z = np.asarray(z, dtype=float)
    zp = np.asarray(zp, dtype=float)
    l, le = t[:2 * n, 2 * n:], t[2 * n:, 2 * n:]
    return purification(np.concatenate([le @ z, zp])), l @ z


def a2_complement_coefficient(z, zp, n0: float) -> complex:
    """``Tr(|psi><psi| W((0, y), z'))`` for ``z = (x, y)``."""
    t = a2_channel(n0).dilation()
    return complement_label(t, 1, thermal_purification(n0), z, zp)[0]


@dataclass
class A2RecoveryReport:
    n0: float
    rows: list
    max_deviation: float
    marginal_deviation: float
    passed: bool


A2_GRID = (0.0, 0.1, -0.1, 1.0, -1.0, 10.0, -10.0)


def verify_a2_recovery(n0: float, grid=A2_GRID, tol: float = 1e-12) -> A2RecoveryReport:
    """Check ``E^c(R(W_S(x, 0))) = W_S(x, 0)`` with ``R(W_S(x, 0)) = W_{E (x) E'}((-x, 0), 0)``."""
    t = a2_channel(n0).dilation()
    psi = thermal_purification(n0)
    rows, worst = [], 0.0
    for x in grid:
        coeff, image = complement_label(t, 1, psi, np.array([-x, 0.0]), np.zeros(2))
        dev = max(abs(coeff - 1.0), float(np.abs(image - np.array([x, 0.0])).max()))
        worst = max(worst, dev)
        rows.append({"x": float(x), "image": image.tolist(), "coefficient": [coeff.real, coeff.imag],
                     "deviation": dev})
    marg = purification_check(n0)["marginal_deviation"]
    return A2RecoveryReport(float(n0), rows, float(worst), marg, bool(worst < tol and marg < tol))
