"""Dense complex linear algebra shared by every other module.

Operators are plain ``numpy`` arrays.  The Hilbert-Schmidt inner product
``<A, B> = trace(A^* B)`` is used for every span, projection and nullspace
computation, and rank decisions are always relative to the largest singular
value (floored at 1, so a numerically zero matrix has full nullity).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    """Global numerical tolerance policy."""

    rank_tol: float = 1e-10
    membership_tol: float = 1e-9
    eq_tol: float = 1e-9
    sdp_tol: float = 1e-7

    def __post_init__(self):
        for name in ("rank_tol", "membership_tol", "eq_tol", "sdp_tol"):
            value = getattr(self, name)
            if not (0.0 < value <= 1e-3):
                raise ValueError(f"{name} must lie in (0, 1e-3], got {value!r}")

    def replace(self, **kwargs) -> "Tolerances":
        fields = {k: getattr(self, k) for k in ("rank_tol", "membership_tol", "eq_tol", "sdp_tol")}
        fields.update({k: v for k, v in kwargs.items() if v is not None})
        return Tolerances(**fields)


DEFAULT_TOL = Tolerances()


def _tol(tol: Tolerances | None) -> Tolerances:
    return DEFAULT_TOL if tol is None else tol


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce ``x`` to a finite 2-d complex array."""
    arr = np.asarray(x, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def dag(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(np.vdot(a, b))


def hs_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def op_norm(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_projection(p: np.ndarray, tol: Tolerances | None = None) -> bool:
    tol = _tol(tol)
    p = np.asarray(p, dtype=complex)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        return False
    scale = max(1.0, hs_norm(p))
    return hs_norm(p @ p - p) <= tol.eq_tol * scale and hs_norm(p - dag(p)) <= tol.eq_tol * scale


def range_isometry(p: np.ndarray, tol: Tolerances | None = None) -> np.ndarray:
    """Orthonormal columns spanning the range of the projection ``p``."""
    tol = _tol(tol)
    w, v = np.linalg.eigh((p + dag(p)) / 2)
    return v[:, w > 0.5]


def kron(*ops: np.ndarray) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def partial_trace(x: np.ndarray, dims: tuple[int, int], which: int) -> np.ndarray:
    """Trace out factor ``which`` (1 or 2) of an operator on ``C^d1 (x) C^d2``.

    >>> partial_trace(np.eye(4), (2, 2), 2)
    array([[2.+0.j, 0.+0.j],
           [0.+0.j, 2.+0.j]])
    """
    x = as_matrix(x, "operator")
    d1, d2 = dims
    if x.shape != (d1 * d2, d1 * d2):
        raise ValueError(f"operator of shape {x.shape} does not act on a {d1}x{d2} bipartite space")
    t = x.reshape(d1, d2, d1, d2)
    if which == 2:
        return np.einsum("ajbj->ab", t)
    if which == 1:
        return np.einsum("iaib->ab", t)
    raise ValueError("which must be 1 or 2")


def nullspace(a: np.ndarray, tol: Tolerances | None = None) -> np.ndarray:
    """Orthonormal basis (as rows) of ``{v : a v = 0}``.

    A singular value counts as zero when it falls below ``rank_tol`` times
    ``max(s_max, 1)``.
    """
    tol = _tol(tol)
    a = np.asarray(a, dtype=complex)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    rank = _rank(s, tol)
    return vh[rank:].conj()


def _rank(s: np.ndarray, tol: Tolerances) -> int:
    if s.size == 0:
        return 0
    return int(np.sum(s > tol.rank_tol * max(float(s[0]), 1.0)))


def orthonormal_span(vectors: Sequence[np.ndarray] | np.ndarray,
                     tol: Tolerances | None = None) -> np.ndarray:
    """HS-orthonormal basis of the linear span of ``vectors``.

    Returns an array of shape ``(k, *shape)``; empty input gives ``k = 0``.
    """
    tol = _tol(tol)
    vectors = [np.asarray(v, dtype=complex) for v in vectors]
    if not vectors:
        return np.zeros((0, 0, 0), dtype=complex)
    shape = vectors[0].shape
    if any(v.shape != shape for v in vectors):
        raise ValueError("all inputs to orthonormal_span must share a shape")
    stack = np.stack([v.ravel() for v in vectors])
    _, s, vh = np.linalg.svd(stack, full_matrices=False)
    rank = _rank(s, tol)
    return vh[:rank].reshape(rank, *shape)


def linear_map_matrix(fn: Callable[[np.ndarray], np.ndarray], shape: tuple[int, ...]) -> np.ndarray:
    """Matrix of a linear map on arrays of ``shape`` acting on flattened inputs."""
    size = int(np.prod(shape))
    cols = []
    for k in range(size):
        e = np.zeros(size, dtype=complex)
        e[k] = 1.0
        cols.append(np.asarray(fn(e.reshape(shape)), dtype=complex).ravel())
    return np.stack(cols, axis=1)


def solve_linear_subspace(constraints: Sequence[Callable[[np.ndarray], np.ndarray]] | np.ndarray,
                          shape: tuple[int, ...],
                          tol: Tolerances | None = None) -> np.ndarray:
    """Solution space of homogeneous linear equations over the entries of an array.

    ``constraints`` is either a sequence of linear maps ``X -> residual`` or an
    already assembled coefficient matrix acting on ``X.ravel()``.  The result
    is an orthonormal basis of the solution space, shape ``(k, *shape)``.

    >>> Z = np.diag([1.0, -1.0])
    >>> solve_linear_subspace([lambda X: X @ Z - Z @ X], (2, 2)).shape
    (2, 2, 2)
    """
    if callable(constraints) or (isinstance(constraints, Sequence) and len(constraints) > 0
                                  and callable(constraints[0])):
        fns = [constraints] if callable(constraints) else list(constraints)
        mat = np.concatenate([linear_map_matrix(f, shape) for f in fns], axis=0)
    elif isinstance(constraints, Sequence) and len(constraints) == 0:
        mat = np.zeros((0, int(np.prod(shape))), dtype=complex)
    else:
        mat = np.asarray(constraints, dtype=complex)
    basis = nullspace(mat, tol)
    return basis.reshape(basis.shape[0], *shape)


def commutation_matrix(t: np.ndarray) -> np.ndarray:
    """Coefficient matrix of ``X -> T X - X T`` on row-major ``X.ravel()``."""
    n = t.shape[0]
    eye = np.eye(n, dtype=complex)
    return np.kron(t, eye) - np.kron(eye, t.T)


def psd_check(h: np.ndarray, tol: float) -> float:
    """Most negative eigenvalue of the Hermitian part of ``h`` (0 if none).

    Raises nothing: callers compare the value against their own threshold.
    """
    if h.size == 0:
        return 0.0
    w = np.linalg.eigvalsh((h + dag(h)) / 2)
    return float(min(0.0, w[0]))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return random_unitary(rows, rng)[:, :cols]


def random_matrix(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = random_matrix(d, d, rng)
    return (g + dag(g)) / 2


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    g = random_matrix(d, d if rank is None else rank, rng)
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def trace_norm(x: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(x, compute_uv=False)))
