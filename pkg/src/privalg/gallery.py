"""Example channels paired with a designated private or correctable subalgebra."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import VNAlgebra, diagonal_algebra, full_algebra, generate
from .channel import (
    Channel,
    ChannelError,
    complement,
    compose,
    from_kraus,
    minimal_stinespring,
    unitary_channel,
)
from .numerics import DEFAULT_TOL, dag, kron, op_norm, random_isometry, random_unitary

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

EXPECTED = ("private", "correctable", "both")


@dataclass
class GalleryEntry:
    name: str
    channel: Channel
    algebra: VNAlgebra
    expected: str
    projection: np.ndarray

    def __post_init__(self):
        if self.expected not in EXPECTED:
            raise ValueError(f"expected must be one of {EXPECTED}")

    @property
    def expect_private(self) -> bool:
        return self.expected in ("private", "both")

    @property
    def expect_correctable(self) -> bool:
        return self.expected in ("correctable", "both")


def deletion(rho: np.ndarray, d: int | None = None) -> GalleryEntry:
    """``E(T) = tr(rho T) I``, from Kraus operators ``sqrt(l_k) |v_k><j|``."""
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0] if d is None else d
    if rho.shape != (d, d) or np.abs(rho - dag(rho)).max() > DEFAULT_TOL.eq_tol:
        raise ChannelError("rho must be a Hermitian d x d matrix")
    w, v = np.linalg.eigh(rho)
    if w[0] < -DEFAULT_TOL.eq_tol or abs(w.sum() - 1) > DEFAULT_TOL.eq_tol:
        raise ChannelError("rho is not a density matrix")
    ks = []
    for lam, vec in zip(w, v.T):
        if lam <= 0:
            continue
        for j in range(d):
            k = np.zeros((d, d), dtype=complex)
            k[:, j] = np.sqrt(lam) * vec
            ks.append(k)
    chan = from_kraus(ks)
    return GalleryEntry(f"deletion-{d}", chan, full_algebra(d), "private", np.eye(d))


def _local(op: np.ndarray, i: int, n: int) -> np.ndarray:
    return kron(*[op if j == i else I2 for j in range(n)])


def _uniform_product(op: np.ndarray, n: int) -> list[np.ndarray]:
    ks = []
    for bits in itertools.product((0, 1), repeat=n):
        ks.append(kron(*[op if s else I2 for s in bits]) / np.sqrt(2 ** n))
    return ks


def phase_flip(n: int) -> GalleryEntry:
    """Uniform phase flips on ``n`` qubits; ``N = (x) Delta_2`` (diagonals)."""
    if not 1 <= n <= 3:
        raise ValueError("phase_flip supports 1 <= n <= 3")
    chan = from_kraus(_uniform_product(Z, n))
    alg = generate([_local(Z, i, n) for i in range(n)], 2 ** n)
    return GalleryEntry(f"phase-flip-{n}", chan, alg, "both", np.eye(2 ** n))


def bit_flip(n: int) -> GalleryEntry:
    """Uniform bit flips on ``n`` qubits; ``N = (x) C_2`` with ``C_2 = alg(X)``."""
    if not 1 <= n <= 3:
        raise ValueError("bit_flip supports 1 <= n <= 3")
    chan = from_kraus(_uniform_product(X, n))
    alg = generate([_local(X, i, n) for i in range(n)], 2 ** n)
    return GalleryEntry(f"bit-flip-{n}", chan, alg, "both", np.eye(2 ** n))


def _index_of(u: np.ndarray, rep: Sequence[np.ndarray], tol: float) -> int:
    for k, v in enumerate(rep):
        if op_norm(u - v) < tol:
            return k
    return -1


def group_average(rep: Sequence[np.ndarray], name: str = "group-average") -> GalleryEntry:
    """``E(T) = |G|^{-1} sum_s pi(s) T pi(s)^*``, the expectation onto ``pi(G)'``.

    With ``N = pi(G)''`` the algebra is private; it is also correctable
    exactly when it is abelian, since then ``E`` fixes ``N`` pointwise.
    """
    rep = [np.asarray(u, dtype=complex) for u in rep]
    if not rep:
        raise ChannelError("empty group")
    d = rep[0].shape[0]
    tol = 1e-8
    for u in rep:
        if op_norm(dag(u) @ u - np.eye(d)) > tol:
            raise ChannelError("group elements must be unitary")
        if _index_of(dag(u), rep, tol) < 0:
            raise ChannelError("not closed under inverses")
        for v in rep:
            if _index_of(u @ v, rep, tol) < 0:
                raise ChannelError("not closed under multiplication")
    g = len(rep)
    chan = from_kraus([dag(u) / np.sqrt(g) for u in rep])
    alg = generate(rep, d)
    abelian = all(op_norm(a @ b - b @ a) < 1e-10 for a in alg.basis for b in alg.basis)
    return GalleryEntry(name, chan, alg, "both" if abelian else "private", np.eye(d))


def z_group() -> list[np.ndarray]:
    return [I2, Z]


def quaternion_group() -> list[np.ndarray]:
    """``{+-I, +-iX, +-iY, +-iZ}``."""
    out = []
    for s in (1, -1):
        out.append(s * I2)
        for p in (X, Y, Z):
            out.append(s * 1j * p)
    return out


def cyclic_group(d: int) -> list[np.ndarray]:
    w = np.exp(2j * np.pi / d)
    gen = np.diag(w ** np.arange(d))
    return [np.linalg.matrix_power(gen, k) for k in range(d)]


def permutation_group(d: int) -> list[np.ndarray]:
    out = []
    for perm in itertools.permutations(range(d)):
        out.append(np.eye(d, dtype=complex)[list(perm)])
    return out


def schur(psi: Sequence[np.ndarray]) -> GalleryEntry:
    """Schur multiplier ``Phi(T) = [<psi_y|psi_x> T_xy]``; the diagonals are correctable."""
    vecs = [np.asarray(p, dtype=complex).ravel() for p in psi]
    if not vecs:
        raise ChannelError("need at least one vector")
    for v in vecs:
        if abs(np.linalg.norm(v) - 1) > DEFAULT_TOL.eq_tol:
            raise ChannelError("all vectors must be unit vectors")
    mat = np.array(vecs)
    m, k = mat.shape
    chan = from_kraus([np.diag(mat[:, j].conj()) for j in range(k)])
    return GalleryEntry(f"schur-{m}", chan, diagonal_algebra(m), "correctable", np.eye(m))


def random_unit_vectors(m: int, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    out = []
    for _ in range(m):
        v = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        out.append(v / np.linalg.norm(v))
    return out


def random_channel(d_in: int, d_out: int, n_kraus: int, rng: np.random.Generator) -> Channel:
    """Random channel ``B(C^{d_in}) -> B(C^{d_out})`` from a Haar isometry.

    ``n_kraus`` is raised if needed so that ``d_in * n_kraus >= d_out``.
    """
    n_kraus = max(n_kraus, -(-d_out // d_in))
    v = random_isometry(d_in * n_kraus, d_out, rng)
    return from_kraus(list(v.reshape(n_kraus, d_in, d_out)))


PLANT_GROUPS = {
    "z": (z_group, 2),
    "x": (lambda: [I2, X], 2),
    "quaternion": (quaternion_group, 2),
    "z3": (lambda: cyclic_group(3), 3),
    "s3": (lambda: permutation_group(3), 3),
    "zz": (lambda: [kron(a, b) for a in (I2, Z) for b in (I2, Z)], 4),
    "q-local": (lambda: [kron(q, I2) for q in quaternion_group()], 4),
}


def planted_private(seed: int, groups: Sequence[str] | None = None, max_dim: int = 4) -> GalleryEntry:
    """``E = Ad(V) o E_G o Phi`` with privacy of ``N = V^* pi(G)'' V`` built in."""
    rng = np.random.default_rng(seed)
    names = [g for g in (groups or PLANT_GROUPS) if PLANT_GROUPS[g][1] <= max_dim]
    gname = names[int(rng.integers(len(names)))]
    rep_fn, d = PLANT_GROUPS[gname]
    rep = rep_fn()
    d_in = int(rng.integers(2, max_dim + 1))
    phi = random_channel(d_in, d, int(rng.integers(1, 4)), rng)
    avg = group_average(rep).channel
    v = random_unitary(d, rng)
    chan = compose(unitary_channel(v), compose(avg, phi))
    alg = generate([dag(v) @ u @ v for u in rep], d)
    return GalleryEntry(f"planted-{gname}-{seed}", chan, alg, "private", np.eye(d))


def planted_correctable(seed: int, max_dim: int = 4) -> GalleryEntry:
    """Complement of a planted private channel; its algebra is correctable."""
    base = planted_private(seed, max_dim=max_dim)
    chan = complement(minimal_stinespring(base.channel))
    return GalleryEntry(f"planted-corr-{seed}", chan, base.algebra, "correctable", base.projection)


def random_instance(seed: int, max_dim: int = 4) -> tuple[Channel, VNAlgebra]:
    """Mixed sweep instance: planted private, planted correctable or unstructured."""
    kind = seed % 3
    if kind == 0:
        e = planted_private(seed, max_dim=max_dim)
        return e.channel, e.algebra
    if kind == 1:
        e = planted_correctable(seed, max_dim=max_dim)
        return e.channel, e.algebra
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, max_dim + 1))
    chan = random_channel(int(rng.integers(2, max_dim + 1)), d, int(rng.integers(1, 4)), rng)
    h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return chan, generate([h + dag(h)], d)


def entry(name: str, **kw) -> GalleryEntry:
    """CLI-facing constructor by name: deletion, phase-flip, bit-flip, group-average, schur."""
    seed = kw.get("seed", 0)
    if name == "deletion":
        d = int(kw.get("d", 2))
        rho = np.zeros((d, d), dtype=complex)
        rho[0, 0] = 1.0
        return deletion(rho if not kw.get("mixed") else np.eye(d) / d)
    if name == "phase-flip":
        return phase_flip(int(kw.get("n", 1)))
    if name == "bit-flip":
        return bit_flip(int(kw.get("n", 1)))
    if name == "group-average":
        group = kw.get("group", "z")
        reps = {"z": z_group, "quaternion": quaternion_group, "trivial": lambda: [I2]}
        if group not in reps:
            raise ValueError(f"unknown group {group!r}; choose from {sorted(reps)}")
        return group_average(reps[group](), f"group-average-{group}")
    if name == "schur":
        m = int(kw.get("m", 3))
        return schur(random_unit_vectors(m, int(kw.get("k", 2)), np.random.default_rng(seed)))
    raise ValueError(f"unknown gallery entry {name!r}")


GALLERY_NAMES = ("deletion", "phase-flip", "bit-flip", "group-average", "schur")


def acceptance_entries(seed: int = 0) -> list[GalleryEntry]:
    """The fixture list used by the acceptance suite."""
    rng = np.random.default_rng(seed)
    out = []
    for d in (2, 4):
        out.append(deletion(np.eye(d) / d if d == 2 else _random_density(d, rng)))
    for n in (1, 2, 3):
        out.append(phase_flip(n))
        out.append(bit_flip(n))
    out.append(group_average(z_group(), "group-average-z"))
    out.append(group_average(quaternion_group(), "group-average-quaternion"))
    for m in (3, 4):
        out.append(schur(random_unit_vectors(m, 2, rng)))
    return out


def _random_density(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    r = g @ dag(g)
    return r / np.trace(r).real
