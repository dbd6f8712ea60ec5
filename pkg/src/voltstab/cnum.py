"""Dense complex linear algebra helpers.

Matrices and vectors are plain numpy arrays (``complex128``).  Factorizations
use LU with partial pivoting from LAPACK via scipy; the singularity decision is
made on the ratio of the smallest to largest pivot magnitude so that every
module agrees on what "singular" means.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

PIVOT_TOL = 1e-10
RESID_TOL = 1e-10
INVERSE_TOL = 1e-9


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when an LU factorization has a pivot ratio below ``PIVOT_TOL``."""

    def __init__(self, message: str = "matrix is singular", pivot_ratio: float = 0.0):
        super().__init__(message)
        self.pivot_ratio = pivot_ratio


def as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    return A


def as_vector(b) -> np.ndarray:
    b = np.asarray(b, dtype=complex)
    if b.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {b.shape}")
    return b


def _require_square(A: np.ndarray) -> None:
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got shape {A.shape}")


def _factor(A: np.ndarray):
    if not np.isfinite(A).all():
        raise ValueError("matrix contains non-finite entries")
    with warnings.catch_warnings():
        # singularity is decided on the pivot ratio below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    return lu, piv, _pivot_ratio(lu)


def _pivot_ratio(lu: np.ndarray) -> float:
    pivots = np.abs(np.diag(lu))
    if pivots.size == 0:
        return 1.0
    largest = pivots.max()
    if largest == 0.0:
        return 0.0
    return float(pivots.min() / largest)


def pivot_ratio(A) -> float:
    """min|pivot| / max|pivot| of the partially pivoted LU factorization of `A`."""
    A = as_matrix(A)
    _require_square(A)
    if A.size == 0:
        return 1.0
    return _factor(A)[2]


def is_invertible(A) -> bool:
    return pivot_ratio(A) > PIVOT_TOL


def lu_solve(A, b) -> np.ndarray:
    """Solve ``A x = b`` with partial pivoting.

    Raises
    ------
    SingularMatrixError
        If the pivot ratio of ``A`` is below ``PIVOT_TOL``.
    """
    A = as_matrix(A)
    b = as_vector(b)
    _require_square(A)
    if A.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: A is {A.shape}, b has length {b.shape[0]}")
    if A.size == 0:
        return b.copy()
    lu, piv, ratio = _factor(A)
    if ratio <= PIVOT_TOL:
        raise SingularMatrixError(f"matrix is singular (pivot ratio {ratio:.3e})", ratio)
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def invert(A) -> np.ndarray:
    """Inverse of `A` via LU; raises SingularMatrixError on a singular input."""
    A = as_matrix(A)
    _require_square(A)
    n = A.shape[0]
    if n == 0:
        return A.copy()
    lu, piv, ratio = _factor(A)
    if ratio <= PIVOT_TOL:
        raise SingularMatrixError(f"matrix is singular (pivot ratio {ratio:.3e})", ratio)
    return scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=complex), check_finite=False)


def min_singular_value(A) -> float:
    """Smallest singular value of a square matrix.

    Returns exactly 0.0 whenever the LU pivot test declares `A` singular, so
    this and :func:`is_invertible` never disagree.
    """
    A = as_matrix(A)
    _require_square(A)
    if A.size == 0:
        return 0.0
    if not np.all(np.isfinite(A)) or not is_invertible(A):
        return 0.0
    return float(np.linalg.svd(A, compute_uv=False)[-1])


def inf_norm(x) -> float:
    """Max absolute entry of a vector or matrix (0 for empty input)."""
    x = np.asarray(x)
    return float(np.max(np.abs(x))) if x.size else 0.0


def row_abs_sums(A) -> np.ndarray:
    return np.sum(np.abs(as_matrix(A)), axis=1)
