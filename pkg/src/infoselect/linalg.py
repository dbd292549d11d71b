"""Dense symmetric positive (semi)definite matrix helpers.

All log determinants go through Cholesky factorizations: for a factor L with
A = L L^T, logdet(A) = 2 * sum(log(diag(L))). Factorizations that fail get a
second chance through an escalating diagonal jitter; see `jitter_schedule`.
Ratios of determinants such as logdet(F P^-1 + I) are always evaluated as
logdet(F + P) - logdet(P) so that both terms stay symmetric and factorizable.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotPositiveDefinite

# Multipliers applied to the base jitter, tried in order. The leading zero
# means well-conditioned matrices are factorized untouched.
JITTER_MULTIPLIERS = (0.0, 1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6)


class PsdMatrix:
    """Symmetric matrix wrapper.

    Construction symmetrizes the input through (A + A^T) / 2, so stored
    entries satisfy M[i, j] == M[j, i] exactly. Positive semidefiniteness is
    a caller obligation; it is enforced lazily by the factorizing routines.
    The wrapped array is frozen to keep instances safely shareable.
    """

    __slots__ = ("values",)

    def __init__(self, values):
        a = np.array(values, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        a = (a + a.T) / 2.0
        a.setflags(write=False)
        object.__setattr__(self, "values", a)

    def __setattr__(self, name, value):
        raise AttributeError("PsdMatrix is immutable")

    @classmethod
    def identity(cls, dim: int) -> "PsdMatrix":
        return cls(np.eye(dim))

    @classmethod
    def zeros(cls, dim: int) -> "PsdMatrix":
        return cls(np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.values))

    def __array__(self, dtype=None, copy=None):
        if dtype is not None:
            return self.values.astype(dtype)
        return self.values

    def __add__(self, other):
        return PsdMatrix(self.values + np.asarray(other))

    __radd__ = __add__

    def __mul__(self, scalar):
        return PsdMatrix(self.values * float(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return f"PsdMatrix(dim={self.dim})"


def as_psd(a) -> PsdMatrix:
    """Coerce an array-like to PsdMatrix (no-op if it already is one)."""
    if isinstance(a, PsdMatrix):
        return a
    return PsdMatrix(a)


def jitter_schedule(a: np.ndarray, base: float | None = None):
    """Yield the jitter magnitudes tried for `a`, in escalation order.

    The default base scales with the diagonal, 1e-10 * (1 + max(diag A)),
    so the schedule adapts to the matrix magnitude.
    """
    if base is None:
        diag = np.diagonal(a)
        base = 1e-10 * (1.0 + float(np.max(diag)) if diag.size else 1.0)
    for mult in JITTER_MULTIPLIERS:
        yield mult * base


def _cholesky_jittered(a: np.ndarray, base: float | None = None):
    """Lower Cholesky factor of `a`, escalating jitter until it succeeds.

    Returns (L, eps) where eps is the diagonal shift that was needed.
    Raises NotPositiveDefinite when the schedule is exhausted.
    """
    eps = 0.0
    for eps in jitter_schedule(a, base):
        try:
            shifted = a if eps == 0.0 else a + eps * np.eye(a.shape[0])
            return scipy.linalg.cholesky(shifted, lower=True), eps
        except scipy.linalg.LinAlgError:
            continue
    raise NotPositiveDefinite(
        f"Cholesky failed for {a.shape[0]}x{a.shape[0]} matrix "
        f"even with jitter {eps:.3e}"
    )


def chol_logdet(a) -> float:
    """log det of a positive definite matrix via its Cholesky factor.

    The jitter schedule is applied if the plain factorization fails, which
    keeps log determinants finite for nearly rank-deficient inputs.
    """
    m = as_psd(a).values
    if m.shape[0] == 0:
        return 0.0
    factor, _ = _cholesky_jittered(m)
    return float(2.0 * np.sum(np.log(np.diagonal(factor))))


def solve_psd(a, b) -> np.ndarray:
    """Solve A X = B for symmetric positive definite A.

    B may be a vector or a matrix of right hand sides. The residual satisfies
    ||A X - B||_F <= 1e-8 ||B||_F for well-conditioned systems.
    """
    m = as_psd(a).values
    rhs = np.asarray(b, dtype=float)
    if rhs.shape[0] != m.shape[0]:
        raise DimensionMismatch(
            f"matrix of dim {m.shape[0]} against right hand side {rhs.shape}"
        )
    factor, _ = _cholesky_jittered(m)
    return scipy.linalg.cho_solve((factor, True), rhs)


def kron(a, b) -> np.ndarray:
    """Kronecker product with entry (iP+k, jQ+l) = A[i,j] * B[k,l]."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def jitter_to_pd(a, base: float | None = None) -> PsdMatrix:
    """Return A + eps*I for the smallest scheduled eps that factorizes.

    A matrix that is already positive definite comes back unchanged
    (eps = 0). Raises NotPositiveDefinite when the schedule is exhausted.
    """
    m = as_psd(a)
    _, eps = _cholesky_jittered(m.values, base)
    if eps == 0.0:
        return m
    return PsdMatrix(m.values + eps * np.eye(m.dim))
