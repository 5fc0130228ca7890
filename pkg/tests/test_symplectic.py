import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privalg.symplectic import (
    A2_GRID,
    GaussianCharFn,
    SymplecticError,
    WeylChannelDescriptor,
    WeylMonomial,
    a2_channel,
    a2_complement_coefficient,
    complete_to_symplectic,
    compose,
    delta,
    is_symplectic,
    private_weyl_subalgebra,
    purification_check,
    subspace,
    subspace_residual,
    symplectic_adjoint,
    symplectic_channel,
    symplectic_complement,
    symplectic_eigenvalues,
    symplectic_form,
    symplectic_residual,
    thermal_purification,
    verify_a2_recovery,
    weyl_commute,
)


def rot(phi):
    return np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])


def random_symplectic(n, rng):
    """Product of block rotations, squeezers and a symplectic shear."""
    t = np.eye(2 * n)
    for _ in range(3):
        blocks = np.zeros((2 * n, 2 * n))
        for i in range(n):
            r = np.exp(rng.normal(scale=0.5))
            blocks[2 * i:2 * i + 2, 2 * i:2 * i + 2] = rot(rng.uniform(0, 2 * np.pi)) @ np.diag([r, 1 / r])
        s = rng.normal(size=(2 * n, 2 * n))
        s = s + s.T
        # exp(Delta S) is symplectic for symmetric S
        w, v = np.linalg.eig(delta(n) @ (0.2 * s))
        shear = np.real(v @ np.diag(np.exp(w)) @ np.linalg.inv(v))
        t = t @ blocks @ shear
    return t


def test_delta_invariants():
    for n in (1, 2, 3):
        d = delta(n)
        assert np.abs(d + d.T).max() == 0
        assert np.abs(d @ d + np.eye(2 * n)).max() == 0


def test_form_examples():
    assert symplectic_form([1, 0], [0, 1], 1) == 1
    z = np.array([0.3, -1.2, 4.0, 2.0])
    assert symplectic_form(z, z, 2) == 0
    assert symplectic_form([1, 2, 3, 4], [0, 1, 1, 0], 2) == -3
    with pytest.raises(SymplecticError):
        symplectic_form([1, 0, 0], [0, 1, 0], 1)


def test_is_symplectic_examples():
    assert is_symplectic(np.eye(2), 1)
    assert is_symplectic(np.diag([2.0, 0.5]), 1)
    assert not is_symplectic(np.diag([1.0, 0.0]), 1)


def test_complement_examples():
    r = subspace([[1.0, 0.0]], 1)
    assert subspace_residual(symplectic_complement(r), r) < 1e-12
    zero = subspace(np.zeros((0, 4)), 2)
    assert symplectic_complement(zero).dim == 4
    lag = subspace([[1, 0, 0, 0], [0, 0, 1, 0]], 2)
    assert subspace_residual(symplectic_complement(lag), lag) < 1e-12


def test_adjoint_examples():
    assert np.abs(symplectic_adjoint(np.eye(2), 1) - np.eye(2)).max() < 1e-15
    assert np.abs(symplectic_adjoint(delta(2), 2) + delta(2)).max() < 1e-15
    assert np.abs(symplectic_adjoint(np.diag([1.0, 0.0]), 1) - np.diag([0.0, 1.0])).max() < 1e-15


def test_completion_examples():
    k = np.diag([1.0, 0.0])
    t = complete_to_symplectic(k, np.eye(2), 1)
    expected = np.block([[k, -np.eye(2)], [np.eye(2), np.diag([0.0, 1.0])]])
    assert np.abs(t - expected).max() == 0
    assert symplectic_residual(t, 2) < 1e-12
    assert np.abs(complete_to_symplectic(np.eye(2), np.zeros((2, 2)), 1) - np.eye(4)).max() == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_completion_of_rotation_pairs(n, seed):
    rng = np.random.default_rng(seed)
    a = np.zeros((2 * n, 2 * n))
    b = np.zeros((2 * n, 2 * n))
    for i in range(n):
        th, ph = rng.uniform(0, 2 * np.pi, size=2)
        a[2 * i:2 * i + 2, 2 * i:2 * i + 2] = np.cos(th) * rot(ph)
        b[2 * i:2 * i + 2, 2 * i:2 * i + 2] = np.sin(th) * rot(ph)
    t = complete_to_symplectic(a, b, n)
    assert symplectic_residual(t, 2 * n) < 1e-12


def test_completion_rejects_bad_pairs():
    with pytest.raises(SymplecticError, match="not completable"):
        complete_to_symplectic(np.eye(2), np.eye(2), 1)
    with pytest.raises(SymplecticError, match="not completable"):
        complete_to_symplectic(np.diag([1.0, 0.0]), np.array([[0.0, 1.0], [1.0, 0.0]]), 1)


def test_weyl_commute_examples():
    z = np.array([0.4, 1.1])
    assert weyl_commute(z, z, 1)
    assert weyl_commute([1, 0], [0, 2 * np.pi], 1)
    assert not weyl_commute([1, 0], [0, 1], 1)


def test_private_subalgebra_examples():
    sub = private_weyl_subalgebra(a2_channel(0))
    assert subspace_residual(sub, subspace([[1.0, 0.0]], 1)) < 1e-12
    rng = np.random.default_rng(0)
    full = private_weyl_subalgebra(symplectic_channel(random_symplectic(2, rng)))
    assert full.dim == 0
    zero_k = WeylChannelDescriptor(np.zeros((2, 2)), np.eye(2), GaussianCharFn(None, 0.5 * np.eye(2)))
    assert private_weyl_subalgebra(zero_k).dim == 2


def test_a2_channel_examples():
    desc = a2_channel(0)
    assert np.abs(desc.env.alpha - 0.5 * np.eye(2)).max() == 0
    t = desc.dilation()
    assert is_symplectic(t, 2, tol=1e-12)
    assert desc.residual < 1e-12
    for x, y in [(0.3, -0.7), (2.0, 1.0), (0.0, 0.0)]:
        assert abs(desc.f([x, y]) - np.exp(-0.25 * (x * x + y * y))) < 1e-15
    with pytest.raises(SymplecticError):
        a2_channel(-1)


def test_a2_complement_coefficient_examples():
    assert abs(a2_complement_coefficient([0, 0], [0, 0], 0) - 1) < 1e-15
    for x in (0.5, -3.0):
        assert abs(a2_complement_coefficient([x, 0], [0, 0], 0) - 1) < 1e-15
    for y in (0.5, -1.5):
        expected = np.exp(-0.5 * 1.5 * y * y)
        assert abs(a2_complement_coefficient([0, y], [0, 0], 1) - expected) < 1e-12


@pytest.mark.parametrize("n0", [0, 1, 2])
def test_a2_recovery(n0):
    rep = verify_a2_recovery(n0)
    assert rep.passed
    assert rep.max_deviation < 1e-12
    assert [r["x"] for r in rep.rows] == list(A2_GRID)
    for r in rep.rows:
        assert abs(r["image"][0] - r["x"]) < 1e-12 and r["image"][1] == 0


@pytest.mark.parametrize("n0", [0, 0.5, 1, 2, 7])
def test_purification_marginal_and_purity(n0):
    check = purification_check(n0)
    assert check["marginal_deviation"] < 1e-12
    assert check["purity_deviation"] < 1e-12
    psi = thermal_purification(n0)
    assert np.abs(symplectic_eigenvalues(psi.alpha) - 0.5).max() < 1e-12


def test_gaussian_admissibility():
    with pytest.raises(SymplecticError):
        GaussianCharFn(None, 0.1 * np.eye(2))
    with pytest.raises(SymplecticError):
        GaussianCharFn(None, np.array([[1.0, 0.2], [0.0, 1.0]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_double_complement_and_dimensions(n, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(0, 2 * n + 1))
    r = subspace(rng.normal(size=(k, 2 * n)), n)
    rd = symplectic_complement(r)
    assert r.dim + rd.dim == 2 * n
    assert subspace_residual(symplectic_complement(rd), r) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_group_closure(n, seed):
    rng = np.random.default_rng(seed)
    s, t = random_symplectic(n, rng), random_symplectic(n, rng)
    assert symplectic_residual(s, n) < 1e-10 * max(1.0, np.abs(s).max() ** 2)
    assert is_symplectic(s @ t, n, tol=1e-9)
    assert is_symplectic(np.linalg.inv(s), n, tol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_ccr_phases_under_symplectic_channels(n, seed):
    rng = np.random.default_rng(seed)
    ch = symplectic_channel(random_symplectic(n, rng))
    a = WeylMonomial(1.0, rng.normal(size=2 * n))
    b = WeylMonomial(1.0, rng.normal(size=2 * n))
    lhs = ch.apply(a * b)
    rhs = ch.apply(a) * ch.apply(b)
    assert abs(lhs.coeff - rhs.coeff) < 1e-12
    assert np.abs(lhs.z - rhs.z).max() < 1e-9
    direct = np.exp(-0.5j * symplectic_form(a.z, b.z, n))
    assert abs((a * b).coeff - direct) < 1e-12


def test_weyl_product_is_associative():
    rng = np.random.default_rng(1)
    a, b, c = (WeylMonomial(1.0, rng.normal(size=4)) for _ in range(3))
    lhs, rhs = (a * b) * c, a * (b * c)
    assert abs(lhs.coeff - rhs.coeff) < 1e-12
    assert np.abs(lhs.z - rhs.z).max() < 1e-15


def test_descriptor_composition_matches_sequential_action():
    first, second = a2_channel(1), a2_channel(0)
    both = compose(second, first)
    rng = np.random.default_rng(2)
    for _ in range(5):
        m = WeylMonomial(1.0, rng.normal(size=2))
        seq = second.apply(first.apply(m))
        one = both.apply(m)
        assert abs(seq.coeff - one.coeff) < 1e-12
        assert np.abs(seq.z - one.z).max() < 1e-15


def test_private_generators_commute_with_image():
    rng = np.random.default_rng(4)
    for desc in (a2_channel(0), a2_channel(2), symplectic_channel(random_symplectic(1, rng))):
        sub = private_weyl_subalgebra(desc)
        for z in sub.basis.T:
            for col in desc.K.T:
                if abs(symplectic_form(z, col, desc.n)) < 1e-12:
                    assert weyl_commute(z, col, desc.n)
        assert sub.certificate is not None and sub.certificate < 1e-12


def test_descriptor_rejects_non_dilatable():
    with pytest.raises(SymplecticError, match="dilatable"):
        WeylChannelDescriptor(np.diag([1.0, 0.0]), np.zeros((2, 2)), GaussianCharFn(None, 0.5 * np.eye(2)))
