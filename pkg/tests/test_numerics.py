import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privalg.numerics import (
    DEFAULT_TOL,
    Tolerances,
    as_matrix,
    kron,
    nullspace,
    orthonormal_span,
    partial_trace,
    psd_check,
    random_matrix,
    solve_linear_subspace,
    trace_norm,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def test_default_tolerances():
    t = Tolerances()
    assert (t.rank_tol, t.membership_tol, t.eq_tol, t.sdp_tol) == (1e-10, 1e-9, 1e-9, 1e-7)
    assert DEFAULT_TOL == t


@pytest.mark.parametrize("bad", [0.0, -1e-9, 2e-3])
def test_tolerance_bounds(bad):
    with pytest.raises(ValueError):
        Tolerances(eq_tol=bad)


def test_replace_keeps_unset_fields():
    t = DEFAULT_TOL.replace(eq_tol=1e-6, rank_tol=None)
    assert t.eq_tol == 1e-6 and t.rank_tol == 1e-10


def test_as_matrix_rejects_nan():
    with pytest.raises(ValueError):
        as_matrix([[np.nan, 0], [0, 1]])
    with pytest.raises(ValueError):
        as_matrix([1, 2, 3])


def test_partial_trace_identity():
    assert np.abs(partial_trace(np.eye(4), (2, 2), 2) - 2 * I2).max() < 1e-15


def test_partial_trace_bell():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = np.outer(psi, psi.conj())
    assert np.abs(partial_trace(rho, (2, 2), 2) - I2 / 2).max() < 1e-15
    assert np.abs(partial_trace(rho, (2, 2), 1) - I2 / 2).max() < 1e-15


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValueError):
        partial_trace(np.eye(5), (2, 2), 2)
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), (2, 2), 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_partial_trace_product(d1, d2, seed):
    rng = np.random.default_rng(seed)
    a, b = random_matrix(d1, d1, rng), random_matrix(d2, d2, rng)
    ab = np.kron(a, b)
    assert np.abs(partial_trace(ab, (d1, d2), 2) - np.trace(b) * a).max() < 1e-9
    assert np.abs(partial_trace(ab, (d1, d2), 1) - np.trace(a) * b).max() < 1e-9
    assert abs(np.trace(partial_trace(ab, (d1, d2), 2)) - np.trace(ab)) < 1e-9


def test_orthonormal_span_examples():
    assert orthonormal_span([I2, 2 * I2]).shape[0] == 1
    assert orthonormal_span([Z, X]).shape[0] == 2
    assert orthonormal_span([I2, Z, I2 + Z]).shape[0] == 2
    assert orthonormal_span([]).shape[0] == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_orthonormal_span_is_orthonormal(k, d, seed):
    rng = np.random.default_rng(seed)
    g = orthonormal_span([random_matrix(d, d, rng) for _ in range(k)])
    gram = np.einsum("aij,bij->ab", g.conj(), g)
    assert np.abs(gram - np.eye(g.shape[0])).max() < 1e-12
    assert g.shape[0] == min(k, d * d)


def test_solve_linear_subspace_examples():
    xhat = X
    assert solve_linear_subspace([lambda m: m @ Z - Z @ m], (2, 2)).shape[0] == 2
    assert solve_linear_subspace([lambda m: m @ I2 - I2 @ m], (2, 2)).shape[0] == 4
    sol = solve_linear_subspace([lambda m: m @ Z - Z @ m, lambda m: m @ xhat - xhat @ m], (2, 2))
    assert sol.shape[0] == 1
    assert np.abs(sol[0] / sol[0][0, 0] - I2).max() < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2 ** 32 - 1))
def test_solutions_satisfy_constraints(d, seed):
    rng = np.random.default_rng(seed)
    t = random_matrix(d, d, rng)
    t = t @ t.conj().T
    sol = solve_linear_subspace([lambda m: m @ t - t @ m], (d, d))
    for s in sol:
        assert np.abs(s @ t - t @ s).max() < DEFAULT_TOL.membership_tol * max(1, np.abs(t).max())


def test_nullspace_of_zero_matrix_is_everything():
    assert nullspace(np.zeros((3, 3))).shape[0] == 3
    assert nullspace(1e-14 * np.ones((2, 2))).shape[0] == 2


def test_kron_and_trace_norm():
    assert np.abs(kron(Z, X) - np.kron(Z, X)).max() == 0
    assert abs(trace_norm(Z) - 2) < 1e-12
    assert psd_check(np.diag([1.0, 0.0]), 1e-9) >= 0
