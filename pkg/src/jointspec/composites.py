"""Composite operators and gap functions for tuples of observables.

The three composites of interest at a probe point lambda:

* tall stack  M_lam = [X_1 - lam_1; ...; X_d - lam_d]
* quadratic   Q_lam = sum_j (X_j - lam_j)^2           (same size as X_j)
* localizer   L_lam = sum_j (X_j - lam_j) (x) Gamma_j (Clifford-enlarged)

with the quadratic gap mu^Q = sigma_min(Q)^(1/2) = sigma_min(M) and the
Clifford (localizer) gap mu^C = sigma_min(L).  The probe is always an input,
never solved for.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .clifford import CliffordRep
from .errors import (
    ChiralSymmetryViolation,
    DimensionMismatch,
    InvalidOperator,
    NotRealMatrix,
    NumericalFailure,
    RepMismatch,
    SymmetryHypothesisViolated,
)
from .operators import (
    DENSE_EIGEN_CUTOFF,
    HermitianOperator,
    StateVector,
    _is_sparse,
    _max_abs,
    operator_norm,
    smallest_abs_eigenvalue,
    smallest_singular_value,
)

COMMUTE_RTOL = 1e-12
#: clamp for tiny negative eigenvalues of the positive-semidefinite Q
NEGATIVE_EIG_TOL = 1e-10

__all__ = [
    "ProbePoint",
    "ObservableTuple",
    "GapResult",
    "tall_composite",
    "quadratic_operator",
    "localizer",
    "quadratic_gap",
    "clifford_gap",
    "gap_pair_with_bound",
    "commutator_bound",
    "commutator_bound_2d",
    "minimizing_state",
    "reduced_localizer",
    "determinant_sign_index",
    "verify_symmetry",
]


@dataclass(frozen=True)
class ProbePoint:
    """A probe lambda in R^d."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coords, dtype=float))
        if not np.all(np.isfinite(c)):
            raise InvalidOperator("probe coordinates must be finite")
        object.__setattr__(self, "coords", c)

    @property
    def d(self) -> int:
        return self.coords.size


def _fro_norm(m) -> float:
    if _is_sparse(m):
        return float(np.sqrt((abs(m.data) ** 2).sum())) if m.nnz else 0.0
    return float(np.linalg.norm(m))


class ObservableTuple:
    """An ordered tuple (X_1, ..., X_d) of equal-size Hermitian observables.

    ``commuting_prefix`` marks how many leading operators mutually commute
    (the position block); this is verified at construction.  ``meta`` carries
    optional lattice bookkeeping (site count, orbitals per site, axis names).
    """

    __slots__ = ("ops", "commuting_prefix", "meta")

    def __init__(self, ops, commuting_prefix: int = 0, meta: Optional[dict] = None):
        ops = tuple(o if isinstance(o, HermitianOperator) else HermitianOperator(o)
                    for o in ops)
        if not ops:
            raise InvalidOperator("need at least one observable")
        dim = ops[0].dim
        for o in ops:
            if o.dim != dim:
                raise DimensionMismatch("all observables must share one dimension")
        if not 0 <= commuting_prefix <= len(ops):
            raise InvalidOperator("commuting_prefix out of range")
        for j in range(commuting_prefix):
            for k in range(j + 1, commuting_prefix):
                a, b = ops[j].mat, ops[k].mat
                comm = a @ b - b @ a
                tol = COMMUTE_RTOL * max(1.0, _fro_norm(a) * _fro_norm(b))
                if _max_abs(comm) > tol:
                    raise InvalidOperator(
                        f"operators {j} and {k} in the commuting prefix do not commute")
        self.ops = ops
        self.commuting_prefix = commuting_prefix
        self.meta = dict(meta or {})

    @property
    def d_total(self) -> int:
        return len(self.ops)

    @property
    def dim(self) -> int:
        return self.ops[0].dim

    @property
    def is_sparse(self) -> bool:
        return any(o.is_sparse for o in self.ops)

    def __repr__(self):
        return (f"ObservableTuple(d={self.d_total}, dim={self.dim}, "
                f"commuting_prefix={self.commuting_prefix})")


@dataclass
class GapResult:
    """Both gaps at one probe plus the commutator bound relating them."""

    lam: ProbePoint
    mu_q: Optional[float] = None
    mu_c: Optional[float] = None
    commutator_bound: Optional[float] = None
    minimizing_state: Optional[StateVector] = None
    degenerate: bool = False


def _as_probe(lam) -> ProbePoint:
    return lam if isinstance(lam, ProbePoint) else ProbePoint(np.asarray(lam, float))


def _check_probe(t: ObservableTuple, lam: ProbePoint):
    if lam.d != t.d_total:
        raise DimensionMismatch(
            f"probe has {lam.d} coordinates for a {t.d_total}-tuple")


def _shifted(op: HermitianOperator, s: float):
    m = op.mat
    if s == 0.0:
        return m
    if _is_sparse(m):
        return m - s * sp.identity(m.shape[0], dtype=complex, format="csr")
    return m - s * np.eye(m.shape[0], dtype=complex)


def tall_composite(t: ObservableTuple, lam) -> np.ndarray:
    """Vertical stack of (X_j - lam_j I), shape (d*n, n)."""
    lam = _as_probe(lam)
    _check_probe(t, lam)
    blocks = [_shifted(o, s) for o, s in zip(t.ops, lam.coords)]
    if t.is_sparse:
        return sp.vstack([sp.csr_matrix(b) for b in blocks], format="csr")
    return np.vstack(blocks)


def quadratic_operator(t: ObservableTuple, lam) -> HermitianOperator:
    """Q_lam = sum (X_j - lam_j)^2, positive-semidefinite, size n x n."""
    lam = _as_probe(lam)
    _check_probe(t, lam)
    acc = None
    for o, s in zip(t.ops, lam.coords):
        m = _shifted(o, s)
        term = m @ m
        acc = term if acc is None else acc + term
    return HermitianOperator(acc, copy=False)


def localizer(t: ObservableTuple, lam, rep: CliffordRep) -> HermitianOperator:
    """L_lam = sum (X_j - lam_j) (x) Gamma_j of dimension n * rep_dim."""
    lam = _as_probe(lam)
    _check_probe(t, lam)
    if rep.d != t.d_total:
        raise RepMismatch(f"representation has d={rep.d}, tuple has d={t.d_total}")
    acc = None
    for o, s, g in zip(t.ops, lam.coords, rep.gammas):
        m = _shifted(o, s)
        term = sp.kron(m, g, format="csr") if _is_sparse(m) else np.kron(m, g)
        acc = term if acc is None else acc + term
    return HermitianOperator(acc, copy=False)


def _smallest_signed_eigenvalue(q: HermitianOperator, accuracy: float) -> float:
    """Smallest eigenvalue of a Hermitian (nominally PSD) matrix, signed."""
    m = q.mat
    n = q.dim
    if (q.is_sparse and n > 512) or n > DENSE_EIGEN_CUTOFF:
        from .operators import _eigsh_nearest_zero
        val, _ = _eigsh_nearest_zero(m, accuracy)
        return float(val)
    md = m.toarray() if _is_sparse(m) else m
    return float(np.linalg.eigvalsh(md).min())


def quadratic_gap(t: ObservableTuple, lam, accuracy: float = 1e-9) -> float:
    """mu^Q at lam: square root of the smallest eigenvalue of Q_lam.

    Computed from the n x n eigenproblem for Q.  Squaring loses accuracy near
    zero, so values below sqrt(machine eps) * ||Q|| are re-verified through
    the SVD of the tall composite.
    """
    lam = _as_probe(lam)
    q = quadratic_operator(t, lam)
    val = _smallest_signed_eigenvalue(q, accuracy)
    scale = max(1.0, _fro_norm(q.mat))
    if val < -NEGATIVE_EIG_TOL * scale:
        raise NumericalFailure(f"Q eigenvalue {val:.3e} below the PSD clamp")
    val = max(val, 0.0)
    if val < np.sqrt(np.finfo(float).eps) * scale:
        # low confidence: the unsquared route is accurate near zero
        return smallest_singular_value(tall_composite(t, lam), accuracy=accuracy)
    return float(np.sqrt(val))


def clifford_gap(t: ObservableTuple, lam, rep: CliffordRep,
                 accuracy: float = 1e-9) -> float:
    """mu^C at lam: smallest absolute eigenvalue of the localizer."""
    return float(smallest_abs_eigenvalue(localizer(t, lam, rep), accuracy=accuracy))


def commutator_bound(t: ObservableTuple) -> float:
    """sum_{j<k} ||[X_j, X_k]||, the gap-difference bound."""
    total = 0.0
    for j in range(t.d_total):
        for k in range(j + 1, t.d_total):
            if j < t.commuting_prefix and k < t.commuting_prefix:
                continue  # exactly zero by construction
            a, b = t.ops[j].mat, t.ops[k].mat
            total += operator_norm(a @ b - b @ a)
    return total


def commutator_bound_2d(t: ObservableTuple) -> float:
    """||[H, X + iY]|| for a (X, Y, H) tuple with commuting X, Y.

    Tighter than the pairwise sum when the Clifford matrices are the Paulis:
    L^2 - Q (x) I is then the off-diagonal block matrix of [H, X+iY].
    """
    if t.d_total != 3 or t.commuting_prefix < 2:
        raise DimensionMismatch("2-d bound needs (X, Y, H) with commuting X, Y")
    x, y, h = (o.mat for o in t.ops)
    a = x + 1j * y
    return operator_norm(h @ a - a @ h)


def gap_pair_with_bound(t: ObservableTuple, lam, rep: CliffordRep,
                        accuracy: float = 1e-9) -> GapResult:
    """Both gaps plus the commutator bound; checks the bound before returning."""
    lam = _as_probe(lam)
    mu_q = quadratic_gap(t, lam, accuracy)
    mu_c = clifford_gap(t, lam, rep, accuracy)
    bound = commutator_bound(t)
    if abs(mu_q ** 2 - mu_c ** 2) > bound + 1e-8:
        raise NumericalFailure(
            "commutator bound violated: "
            f"|mu_q^2 - mu_c^2| = {abs(mu_q**2 - mu_c**2):.3e} > {bound:.3e}")
    return GapResult(lam=lam, mu_q=mu_q, mu_c=mu_c, commutator_bound=bound)


DEGENERACY_TOL = 1e-8


def minimizing_state(t: ObservableTuple, lam, accuracy: float = 1e-9):
    """Unit eigenvector of Q_lam for its smallest eigenvalue.

    Returns ``(state, degenerate)``; ``degenerate`` is set when the second
    eigenvalue lies within 1e-8 of the smallest.  The solver's eigenvector is
    returned as-is (no canonical phase), since a degenerate minimum has no
    preferred basis.
    """
    lam = _as_probe(lam)
    q = quadratic_operator(t, lam)
    m = q.mat
    n = q.dim
    if q.is_sparse and n > 512 or n > DENSE_EIGEN_CUTOFF:
        import scipy.sparse.linalg as spla
        ms = m.tocsc() if _is_sparse(m) else sp.csc_matrix(m)
        try:
            w, v = spla.eigsh(ms, k=2, sigma=0, which="LM", tol=accuracy)
        except Exception as exc:  # singular / no convergence: dense fallback
            if n > DENSE_EIGEN_CUTOFF:
                raise NumericalFailure("sparse minimizing-state solve failed",
                                       details={"exc": str(exc)}) from exc
            w, v = np.linalg.eigh(m.toarray() if _is_sparse(m) else m)
        order = np.argsort(np.abs(w))
        w, v = w[order], v[:, order]
    else:
        w, v = np.linalg.eigh(m.toarray() if _is_sparse(m) else m)
    vec = v[:, 0]
    scale = max(1.0, _fro_norm(m))
    resid = np.linalg.norm(m @ vec - w[0] * vec)
    if resid > 1e-8 * scale:
        raise NumericalFailure(f"minimizing state residual {resid:.3e} too large")
    degenerate = len(w) > 1 and abs(w[1] - w[0]) <= DEGENERACY_TOL * max(1.0, abs(w[0]))
    return StateVector(vec, normalize=True), bool(degenerate)


GRADING_TOL = 1e-10


def reduced_localizer(x: HermitianOperator, h: HermitianOperator,
                      lambda_x: float, grading) -> np.ndarray:
    """((X - lambda_x I) + i H) Gamma for a chiral pair (X, H).

    Requires the grading to commute with X, anticommute with H and square to
    the identity; the localizer spectrum is then the +-eigenvalue pairs of
    this half-size matrix, and its determinant is real.
    """
    g = grading.mat if isinstance(grading, HermitianOperator) else np.asarray(grading)
    g = g.toarray() if _is_sparse(g) else np.asarray(g, dtype=complex)
    xm = x.dense() if isinstance(x, HermitianOperator) else np.asarray(x, complex)
    hm = h.dense() if isinstance(h, HermitianOperator) else np.asarray(h, complex)
    if xm.shape != hm.shape or xm.shape != g.shape:
        raise DimensionMismatch("X, H and grading must share one dimension")
    n = xm.shape[0]
    eye = np.eye(n)
    if np.abs(g @ g - eye).max() > GRADING_TOL:
        raise ChiralSymmetryViolation("grading does not square to the identity")
    if np.abs(hm @ g + g @ hm).max() > GRADING_TOL * max(1.0, np.abs(hm).max()):
        raise ChiralSymmetryViolation("grading does not anticommute with H")
    if np.abs(xm @ g - g @ xm).max() > GRADING_TOL * max(1.0, np.abs(xm).max()):
        raise ChiralSymmetryViolation("grading does not commute with X")
    return ((xm - lambda_x * eye) + 1j * hm) @ g


def determinant_sign_index(a) -> int:
    """Sign of det(A) for a (numerically) real square matrix: -1, 0 or +1."""
    m = np.asarray(a.toarray() if _is_sparse(a) else a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch("determinant sign needs a square matrix")
    scale = max(1.0, np.abs(m).max())
    if np.abs(m.imag).max() > 1e-10 * scale:
        raise NotRealMatrix(
            f"imaginary parts up to {np.abs(m.imag).max():.3e} exceed tolerance")
    sign, logabs = np.linalg.slogdet(m.real)
    n = m.shape[0]
    if sign == 0.0 or logabs < np.log(1e-12) + n * np.log(scale):
        return 0
    return int(np.sign(sign))


SYMMETRY_TOL = 1e-10
SYMMETRY_GAP_TOL = 1e-8


def verify_symmetry(t: ObservableTuple, s, flipped_index: int, lam,
                    rep: CliffordRep) -> bool:
    """Certify mu(lam) = mu(gamma) for gamma = lam with one coordinate negated.

    Hypotheses (checked, violation raises): S unitary, S X_j = X_j S for all
    j except S X_f = -X_f S at the flipped index.  Under them both gaps are
    invariant under negating that probe coordinate.
    """
    lam = _as_probe(lam)
    _check_probe(t, lam)
    sm = np.asarray(s.toarray() if _is_sparse(s) else s, dtype=complex)
    n = t.dim
    if sm.shape != (n, n):
        raise DimensionMismatch("S must match the observable dimension")
    if np.abs(sm @ sm.conj().T - np.eye(n)).max() > SYMMETRY_TOL:
        raise SymmetryHypothesisViolated("S is not unitary")
    for j, o in enumerate(t.ops):
        xm = o.dense()
        sign = -1.0 if j == flipped_index else 1.0
        resid = np.abs(sm @ xm - sign * xm @ sm).max()
        if resid > SYMMETRY_TOL * max(1.0, np.abs(xm).max()):
            rel = "anticommute" if j == flipped_index else "commute"
            raise SymmetryHypothesisViolated(
                f"S fails to {rel} with operator {j} (residual {resid:.3e})")
    gamma = lam.coords.copy()
    gamma[flipped_index] = -gamma[flipped_index]
    ok_q = abs(quadratic_gap(t, lam) - quadratic_gap(t, gamma)) <= SYMMETRY_GAP_TOL
    ok_c = abs(clifford_gap(t, lam, rep) - clifford_gap(t, gamma, rep)) <= SYMMETRY_GAP_TOL
    return bool(ok_q and ok_c)
