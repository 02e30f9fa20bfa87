import numpy as np
import pytest
import scipy.sparse as sp

from jointspec.errors import (DegenerateScalars, DimensionMismatch,
                              InvalidOperator)
from jointspec.operators import (HermitianOperator, StateVector, eigen_error,
                                 expectation, operator_norm,
                                 overlap_bound_check, smallest_abs_eigenvalue,
                                 smallest_singular_value, variance_sq)

rng = np.random.default_rng(7)


def random_hermitian(n, seed=None):
    r = np.random.default_rng(seed) if seed is not None else rng
    a = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
    return (a + a.conj().T) / 2


def test_accepts_hermitian_and_symmetrizes():
    a = random_hermitian(5)
    op = HermitianOperator(a + 1e-14 * 1j * np.eye(5))
    assert np.allclose(op.mat, op.mat.conj().T)
    assert op.dim == 5 and not op.is_sparse


def test_rejects_non_hermitian():
    with pytest.raises(InvalidOperator):
        HermitianOperator(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_rejects_non_square_and_nonfinite():
    with pytest.raises(InvalidOperator):
        HermitianOperator(np.zeros((2, 3)))
    with pytest.raises(InvalidOperator):
        HermitianOperator(np.array([[np.nan, 0], [0, 0]]))


def test_sparse_roundtrip():
    m = sp.diags([1.0, -2.0, 3.0]).tocsr()
    op = HermitianOperator(m)
    assert op.is_sparse
    assert op.is_diagonal
    np.testing.assert_allclose(op.diagonal(), [1, -2, 3])
    np.testing.assert_allclose(op.dense(), np.diag([1.0, -2.0, 3.0]))


def test_is_diagonal_dense():
    assert HermitianOperator(np.diag([1.0, 2.0])).is_diagonal
    assert not HermitianOperator(np.array([[0, 1.0], [1.0, 0]])).is_diagonal


def test_state_vector_unit_check():
    with pytest.raises(InvalidOperator):
        StateVector([1.0, 1.0])
    v = StateVector([1.0, 1.0], normalize=True)
    assert np.isclose(np.linalg.norm(v.vec), 1.0)
    with pytest.raises(InvalidOperator):
        StateVector([0.0, 0.0], normalize=True)


def test_operator_norm_matches_numpy():
    a = random_hermitian(8)
    assert np.isclose(operator_norm(a), np.linalg.norm(a, 2))
    s = sp.csr_matrix(a)
    assert np.isclose(operator_norm(s), np.linalg.norm(a, 2), rtol=1e-8)


def test_smallest_singular_value_rectangular():
    a = rng.standard_normal((12, 5))
    assert np.isclose(smallest_singular_value(a), np.linalg.svd(a)[1].min())


def test_smallest_abs_eigenvalue_dense():
    a = np.diag([-3.0, 0.5, 2.0])
    val = smallest_abs_eigenvalue(a)
    assert np.isclose(val, 0.5)


def test_smallest_abs_eigenvalue_sparse_matches_dense():
    n = 700
    diag = np.linspace(-5, 5, n)
    off = 0.3 * np.ones(n - 1)
    m = sp.diags([off, diag, off], [-1, 0, 1]).tocsr()
    dense_val = np.abs(np.linalg.eigvalsh(m.toarray())).min()
    val = smallest_abs_eigenvalue(m, accuracy=1e-10)
    assert np.isclose(abs(val), dense_val, atol=1e-8)


def test_smallest_abs_eigenvalue_vector():
    a = np.diag([4.0, 0.25, -2.0])
    val, vec = smallest_abs_eigenvalue(a, want_vector=True)
    assert np.isclose(val, 0.25)
    assert np.isclose(abs(vec[1]), 1.0)


def test_expectation_and_variance():
    a = HermitianOperator(random_hermitian(6))
    v = StateVector(rng.standard_normal(6) + 1j * rng.standard_normal(6),
                    normalize=True)
    ev = expectation(a, v)
    assert np.isclose(ev, np.real(v.vec.conj() @ a.mat @ v.vec))
    var = variance_sq(a, v)
    direct = np.real(v.vec.conj() @ a.mat @ a.mat @ v.vec) - ev ** 2
    assert np.isclose(var, direct)
    assert var >= 0


def test_eigen_error_decomposition():
    a = HermitianOperator(random_hermitian(6))
    v = StateVector(rng.standard_normal(6) + 1j * rng.standard_normal(6),
                    normalize=True)
    lam = 0.7
    err = eigen_error(a, v, lam)
    ev = expectation(a, v)
    assert np.isclose(err ** 2, variance_sq(a, v) + (ev - lam) ** 2, atol=1e-10)


def test_eigen_error_exact_eigenvector():
    a = HermitianOperator(np.diag([1.0, 5.0]))
    v = StateVector([1.0, 0.0])
    assert eigen_error(a, v, 1.0) < 1e-14


def test_overlap_bound():
    a = HermitianOperator(random_hermitian(5, seed=3))
    vals, vecs = np.linalg.eigh(a.mat)
    v = StateVector(vecs[:, 0])
    w = StateVector(vecs[:, 1])
    assert overlap_bound_check(a, v, w, float(vals[0]), float(vals[1]))
    with pytest.raises(DegenerateScalars):
        overlap_bound_check(a, v, w, 1.0, 1.0)


def test_dimension_mismatch():
    a = HermitianOperator(np.eye(3))
    v = StateVector([1.0, 0.0])
    with pytest.raises(DimensionMismatch):
        expectation(a, v)
