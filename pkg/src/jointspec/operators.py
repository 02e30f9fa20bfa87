"""Dense/sparse Hermitian operators, state vectors and spectral primitives.

Everything downstream (composite operators, gap maps, truncation bounds)
reduces to the handful of primitives defined here: operator norms, smallest
singular values, smallest-magnitude eigenvalues and the expectation /
variance functionals of unit states.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.linalg import ArpackNoConvergence

from .errors import (
    DegenerateScalars,
    DimensionMismatch,
    InvalidOperator,
    NumericalFailure,
)

HERMITICITY_RTOL = 1e-12
#: largest total dimension for which dense eigensolvers are the default
DENSE_EIGEN_CUTOFF = 4096

__all__ = [
    "HermitianOperator",
    "StateVector",
    "operator_norm",
    "smallest_singular_value",
    "smallest_abs_eigenvalue",
    "expectation",
    "variance_sq",
    "eigen_error",
    "overlap_bound_check",
]


def _is_sparse(m) -> bool:
    return sp.issparse(m)


def _as_matrix(a):
    """Return the raw matrix behind `a` (HermitianOperator, ndarray or sparse)."""
    if isinstance(a, HermitianOperator):
        return a.mat
    if _is_sparse(a):
        return a
    return np.asarray(a)


def _check_finite(m):
    data = m.data if _is_sparse(m) else m
    if not np.all(np.isfinite(np.asarray(data).ravel().view(float) if np.iscomplexobj(data) else data)):
        raise InvalidOperator("matrix has non-finite entries")


def _max_abs(m) -> float:
    if _is_sparse(m):
        return float(abs(m).max()) if m.nnz else 0.0
    return float(np.abs(m).max()) if m.size else 0.0


def _norm_upper_bound(m) -> float:
    """Cheap upper bound on the operator norm (via max row/col 1-norms)."""
    a = abs(m)
    if _is_sparse(m):
        r = a.sum(axis=1).max()
        c = a.sum(axis=0).max()
    else:
        r = a.sum(axis=1).max()
        c = a.sum(axis=0).max()
    return float(np.sqrt(float(r) * float(c))) if m.shape[0] and m.shape[1] else 0.0


class HermitianOperator:
    """A verified Hermitian matrix (dense ndarray or scipy sparse).

    The constructor checks ``max|A - A^dag| <= 1e-12 * max(1, ||A||)`` and then
    symmetrizes ``A <- (A + A^dag)/2`` so round-off asymmetry cannot leak into
    downstream eigensolvers.
    """

    __slots__ = ("_mat",)

    def __init__(self, matrix, *, copy: bool = True):
        m = matrix.mat if isinstance(matrix, HermitianOperator) else matrix
        if _is_sparse(m):
            m = m.tocsr(copy=copy)
        else:
            m = (np.array(m, dtype=complex) if copy
                 else np.asarray(m, dtype=complex))
            if m.ndim != 2:
                raise InvalidOperator("expected a 2-d matrix")
        if m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidOperator(f"expected a square matrix, got shape {m.shape}")
        _check_finite(m)
        dag = m.conj().T
        asym = _max_abs(m - dag)
        scale = max(1.0, _norm_upper_bound(m))
        if asym > HERMITICITY_RTOL * scale:
            raise InvalidOperator(
                f"matrix is not Hermitian: max|A - A^dag| = {asym:.3e} "
                f"exceeds {HERMITICITY_RTOL:.0e} * {scale:.3e}"
            )
        m = (m + dag) * 0.5
        if _is_sparse(m):
            m = m.tocsr()
        self._mat = m

    @property
    def mat(self):
        return self._mat

    @property
    def dim(self) -> int:
        return self._mat.shape[0]

    @property
    def is_sparse(self) -> bool:
        return _is_sparse(self._mat)

    def dense(self) -> np.ndarray:
        return self._mat.toarray() if self.is_sparse else self._mat

    def diagonal(self) -> np.ndarray:
        return np.asarray(self._mat.diagonal())

    @property
    def is_diagonal(self) -> bool:
        off = self._mat - (sp.diags(self._mat.diagonal()) if self.is_sparse
                           else np.diag(self._mat.diagonal()))
        return _max_abs(off) == 0.0

    def __matmul__(self, other):
        o = other.mat if isinstance(other, HermitianOperator) else other
        return self._mat @ o

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"HermitianOperator(dim={self.dim}, {kind})"


class StateVector:
    """A unit vector in C^n (checked to norm 1 within 1e-12, then renormalized)."""

    __slots__ = ("_vec",)

    UNIT_TOL = 1e-12

    def __init__(self, entries, *, normalize: bool = False):
        v = np.array(entries, dtype=complex).ravel()
        if v.size < 1:
            raise InvalidOperator("empty state vector")
        if not np.all(np.isfinite(v.view(float))):
            raise InvalidOperator("state vector has non-finite entries")
        nrm = float(np.linalg.norm(v))
        if normalize:
            if nrm == 0.0:
                raise InvalidOperator("cannot normalize the zero vector")
        elif abs(nrm - 1.0) > self.UNIT_TOL * max(1.0, nrm):
            raise InvalidOperator(f"state vector norm {nrm!r} is not 1")
        self._vec = v / nrm

    @property
    def vec(self) -> np.ndarray:
        return self._vec

    @property
    def dim(self) -> int:
        return self._vec.size

    def __repr__(self):
        return f"StateVector(dim={self.dim})"


def _check_dims(a: HermitianOperator, v: StateVector):
    if a.dim != v.dim:
        raise DimensionMismatch(f"operator dim {a.dim} != state dim {v.dim}")


# ---------------------------------------------------------------------------
# spectral primitives


def operator_norm(a) -> float:
    """Largest singular value of `a` (HermitianOperator, ndarray or sparse)."""
    m = _as_matrix(a)
    _check_finite(m)
    if min(m.shape) == 0:
        return 0.0
    if _is_sparse(m):
        if min(m.shape) == 1:
            return float(np.linalg.norm(m.toarray()))
        if m.nnz == 0:
            return 0.0
        try:
            s = spla.svds(m, k=1, which="LM", return_singular_vectors=False,
                          maxiter=5000)
        except ArpackNoConvergence as exc:
            raise NumericalFailure("svds failed to converge for operator norm",
                                   details={"exc": str(exc)}) from exc
        return float(s[0])
    if min(m.shape) == 1:
        return float(np.linalg.norm(m))
    return float(np.linalg.norm(m, 2))


def _sigma_min_dense(m: np.ndarray) -> float:
    if min(m.shape) == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[-1])


def _augmented(m):
    """Hermitian [[0, A^dag], [A, 0]] whose |eigenvalues| are singular values."""
    p, n = m.shape
    if _is_sparse(m):
        return sp.bmat([[None, m.conj().T], [m, None]], format="csr")
    top = np.hstack([np.zeros((n, n), complex), m.conj().T])
    bot = np.hstack([m, np.zeros((p, p), complex)])
    return np.vstack([top, bot])


def _eigsh_nearest_zero(m, accuracy: float, want_vector: bool = False):
    """Eigenvalue of Hermitian `m` nearest 0 via shift-invert.

    Returns (value, vector-or-None).  An exactly singular factorization means
    0 is an eigenvalue; in that case a tiny complex shift is retried before
    falling back to 0.
    """
    ms = m.tocsc() if _is_sparse(m) else sp.csc_matrix(m)
    for sigma in (0.0, 1e-10 * max(1.0, _norm_upper_bound(ms))):
        try:
            if want_vector:
                w, v = spla.eigsh(ms, k=1, sigma=sigma, which="LM", tol=accuracy)
                return float(w[0]), v[:, 0]
            w = spla.eigsh(ms, k=1, sigma=sigma, which="LM", tol=accuracy,
                           return_eigenvectors=False)
            return float(w[0]), None
        except ArpackNoConvergence as exc:
            raise NumericalFailure(
                "shift-invert eigsh failed to converge",
                details={"dim": ms.shape[0], "sigma": sigma, "exc": str(exc)},
            ) from exc
        except RuntimeError:
            # singular factorization: retry with the jittered shift
            continue
    # matrix is singular to working precision
    return 0.0, None


def smallest_singular_value(a, accuracy: float = 1e-9) -> float:
    """sigma_min(A) = min over unit v of ||A v||, for rectangular A."""
    m = _as_matrix(a)
    _check_finite(m)
    if _is_sparse(m) and max(m.shape) > DENSE_EIGEN_CUTOFF:
        val, _ = _eigsh_nearest_zero(_augmented(m), accuracy)
        return abs(val)
    if _is_sparse(m):
        m = m.toarray()
    return _sigma_min_dense(np.asarray(m, dtype=complex))


def smallest_abs_eigenvalue(a, accuracy: float = 1e-9,
                            want_vector: bool = False):
    """Smallest |eigenvalue| of a Hermitian matrix.

    Dense eigendecomposition up to dimension ``DENSE_EIGEN_CUTOFF``; above
    that (or for sparse inputs over ~512) a shift-invert iteration at shift 0.
    With ``want_vector=True`` returns ``(value, eigenvector)``.
    """
    m = _as_matrix(a)
    _check_finite(m)
    n = m.shape[0]
    use_iterative = (_is_sparse(m) and n > 512) or n > DENSE_EIGEN_CUTOFF
    if use_iterative:
        val, vec = _eigsh_nearest_zero(m, accuracy, want_vector=want_vector)
        if want_vector and vec is None:
            # singular case: recover a null vector densely if feasible
            if n <= DENSE_EIGEN_CUTOFF:
                md = m.toarray() if _is_sparse(m) else m
                w, v = np.linalg.eigh(md)
                i = int(np.argmin(np.abs(w)))
                return abs(float(w[i])), v[:, i]
            raise NumericalFailure("singular matrix: null vector not recovered",
                                   details={"dim": n})
        return (abs(val), vec) if want_vector else abs(val)
    md = m.toarray() if _is_sparse(m) else np.asarray(m, dtype=complex)
    if want_vector:
        w, v = np.linalg.eigh(md)
        i = int(np.argmin(np.abs(w)))
        return abs(float(w[i])), v[:, i]
    w = np.linalg.eigvalsh(md)
    return float(np.min(np.abs(w)))


# ---------------------------------------------------------------------------
# state functionals


def expectation(a: HermitianOperator, v: StateVector) -> float:
    """<A v, v> for a Hermitian A and unit v; the imaginary residue is checked
    against 1e-12 * ||A|| and discarded."""
    _check_dims(a, v)
    val = np.vdot(v.vec, a.mat @ v.vec)
    scale = max(1.0, _norm_upper_bound(a.mat))
    if abs(val.imag) > 1e-12 * scale:
        raise NumericalFailure(f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def variance_sq(a: HermitianOperator, v: StateVector) -> float:
    """Squared variance <A^2 v, v> - <A v, v>^2, clamped at -1e-12 round-off."""
    _check_dims(a, v)
    av = a.mat @ v.vec
    second = float(np.vdot(av, av).real)  # <A^2 v, v> since A is Hermitian
    first = float(np.vdot(v.vec, av).real)
    var = second - first * first
    scale = max(1.0, second)
    if var < -1e-12 * scale:
        raise NumericalFailure(f"variance {var:.3e} below round-off tolerance")
    return max(var, 0.0)


def eigen_error(a: HermitianOperator, v: StateVector, lam: float) -> float:
    """||A v - lam v||, the eigen-error of (v, lam) for A."""
    _check_dims(a, v)
    return float(np.linalg.norm(a.mat @ v.vec - lam * v.vec))


def overlap_bound_check(a: HermitianOperator, v: StateVector, w: StateVector,
                        lam: float, mu: float) -> bool:
    """Check |<v,w>| <= (||Av - lam v|| + ||Aw - mu w||) / |lam - mu| + 1e-12.

    Property-test oracle for the approximate-orthogonality lemma; a ``False``
    indicates a bug somewhere, never physics.
    """
    if lam == mu:
        raise DegenerateScalars("lambda and mu must differ")
    lhs = abs(np.vdot(v.vec, w.vec))
    rhs = (eigen_error(a, v, lam) + eigen_error(a, w, mu)) / abs(lam - mu)
    return bool(lhs <= rhs + 1e-12)
