import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import planted_algebra
from privalg.algebra import (
    AlgebraError,
    block_algebra,
    center,
    commutant,
    conditional_expectation,
    contains,
    diagonal_algebra,
    full_algebra,
    generate,
    is_factor,
    scalars,
    structure,
    subspace_distance,
)
from privalg.numerics import dag, kron, random_hermitian, random_matrix, random_unitary

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def _m2_i2():
    return generate([kron(X, I2), kron(Z, I2)], 4)


def test_generate_examples():
    delta2 = generate([Z], 2)
    assert delta2.dim == 2
    assert contains(delta2, np.diag([3.0, -1.0]))[0]
    c2 = generate([X], 2)
    assert c2.dim == 2
    assert contains(c2, np.array([[1, 2], [2, 1]]))[0]
    assert generate([], 3).dim == 1


def test_generate_rejects_bad_unit():
    with pytest.raises(AlgebraError):
        generate([Z], 2, np.array([[1, 1], [0, 0]]))
    p = np.diag([1.0, 0.0])
    with pytest.raises(AlgebraError):
        generate([X], 2, p)


def test_generate_with_subunit():
    p = np.diag([1.0, 1.0, 0.0])
    g = np.zeros((3, 3), dtype=complex)
    g[:2, :2] = X
    a = generate([g], 3, p)
    assert a.dim == 2
    assert np.abs(a.unit - p).max() < 1e-15
    a.validate()


def test_commutant_examples():
    assert commutant(scalars(3)).dim == 9
    delta2 = generate([Z], 2)
    assert subspace_distance(commutant(delta2), delta2) < 1e-12
    comm = commutant(_m2_i2())
    target = generate([kron(I2, X), kron(I2, Z)], 4)
    assert subspace_distance(comm, target) < 1e-12


def test_center_and_factor():
    assert center(full_algebra(3)).dim == 1
    assert is_factor(full_algebra(3))
    delta2 = generate([Z], 2)
    assert center(delta2).dim == 2
    assert not is_factor(delta2)
    assert is_factor(generate([kron(I2, X), kron(I2, Z)], 4))


def test_structure_examples():
    assert structure(full_algebra(2)).blocks == ((2, 1),)
    assert structure(generate([Z], 2)).blocks == ((1, 1), (1, 1))
    st_ = structure(generate([kron(I2, X), kron(I2, Z)], 4))
    assert st_.blocks == ((2, 2),)


def test_structure_conjugates_to_blocks():
    rng = np.random.default_rng(3)
    a, blocks = planted_algebra(rng)
    st_ = structure(a)
    assert sorted(st_.blocks) == sorted(blocks)
    for b in a.basis:
        assert np.abs(st_.embed(st_.extract(b)) - b).max() < 1e-9


def test_contains_examples():
    delta2 = generate([Z], 2)
    ok, res = contains(delta2, Z)
    assert ok and res < 1e-12
    ok, res = contains(delta2, X)
    assert not ok and abs(res - 1) < 1e-12
    rng = np.random.default_rng(0)
    assert contains(full_algebra(3), random_matrix(3, 3, rng))[0]
    assert contains(delta2, np.zeros((2, 2)))[0]


def test_conditional_expectation_examples():
    e = conditional_expectation(diagonal_algebra(2))
    t = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.abs(e.apply(t) - np.diag([1, 4])).max() < 1e-12
    e1 = conditional_expectation(scalars(3))
    rng = np.random.default_rng(1)
    x = random_matrix(3, 3, rng)
    assert np.abs(e1.apply(x) - np.trace(x) / 3 * np.eye(3)).max() < 1e-12
    ez = conditional_expectation(generate([Z], 2))
    assert np.abs(ez.apply(t) - (t + Z @ t @ Z) / 2).max() < 1e-12


def test_conditional_expectation_idempotent():
    rng = np.random.default_rng(5)
    a, _ = planted_algebra(rng)
    e = conditional_expectation(a)
    for x in e.domain.basis:
        once = e.apply(x)
        assert np.abs(e.apply(once) - once).max() < 1e-9
        assert contains(a, once)[0]
    for b in a.basis:
        assert np.abs(e.apply(b) - b).max() < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_double_commutant_property(seed):
    a, blocks = planted_algebra(np.random.default_rng(seed))
    aa = commutant(commutant(a))
    assert subspace_distance(aa, a) < 1e-9
    assert a.dim == sum(x * x for x, _ in blocks)
    assert sum(x * x for x, _ in structure(a).blocks) == a.dim


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_commutant_commutes(seed):
    a, _ = planted_algebra(np.random.default_rng(seed))
    c = commutant(a)
    worst = max(np.abs(x @ y - y @ x).max() for x in a.basis for y in c.basis)
    assert worst < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2 ** 32 - 1))
def test_conjugated_algebra_is_unitarily_equivalent(d, seed):
    rng = np.random.default_rng(seed)
    u = random_unitary(d, rng)
    a = generate([random_hermitian(d, rng)], d)
    b = generate([dag(u) @ x @ u for x in a.basis], d)
    assert subspace_distance(a.conjugate(u), b) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_structured_commutant_matches_solved_commutant(seed):
    a, _ = planted_algebra(np.random.default_rng(seed), unital=True)
    solved = commutant(a)
    s = structure(a)
    blocked = commutant(block_algebra(s.blocks, s.change_of_basis))
    assert subspace_distance(solved, blocked) < 1e-9
