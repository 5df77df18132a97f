"""Dense linear-algebra kernel: symmetric eigen-extremes, spectral norms,
and cacheable symmetric positive definite solves.

All routines take and return float64 numpy arrays. Matrices fed to the
symmetric routines must be symmetric up to a relative tolerance of 1e-10;
they are explicitly symmetrized before factorization so that roundoff in
the caller cannot leak into eigenvalue signs.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .exceptions import NumericalError, ShapeError

# relative symmetry slack: |M - M^T| <= SYMMETRY_RTOL * (1 + max|M|)
SYMMETRY_RTOL = 1e-10


def as_matrix(matrix) -> np.ndarray:
    """Coerce to a 2-d float64 array with finite entries."""
    out = np.asarray(matrix, dtype=np.float64)
    if out.ndim != 2 or out.size == 0:
        raise ShapeError(f"expected a nonempty matrix, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ShapeError("matrix has non-finite entries")
    return out


def as_vector(vector) -> np.ndarray:
    """Coerce to a 1-d float64 array with finite entries."""
    out = np.asarray(vector, dtype=np.float64)
    if out.ndim != 1 or out.size == 0:
        raise ShapeError(f"expected a nonempty vector, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ShapeError("vector has non-finite entries")
    return out


def require_symmetric(matrix: np.ndarray) -> np.ndarray:
    """Validate square + symmetric (relative tol 1e-10), return (M + M^T)/2."""
    mat = as_matrix(matrix)
    if mat.shape[0] != mat.shape[1]:
        raise ShapeError(f"matrix is not square: shape {mat.shape}")
    scale = 1.0 + np.abs(mat).max()
    skew = np.abs(mat - mat.T).max()
    if skew > SYMMETRY_RTOL * scale:
        raise ShapeError(
            f"matrix is not symmetric: |M - M^T| reaches {skew:.3e} "
            f"(allowed {SYMMETRY_RTOL * scale:.3e})"
        )
    return 0.5 * (mat + mat.T)


def min_eigenvalue_symmetric(matrix) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    sym = require_symmetric(matrix)
    return float(np.linalg.eigvalsh(sym)[0])


def max_eigenvalue_symmetric(matrix) -> float:
    """Largest eigenvalue of a symmetric matrix."""
    sym = require_symmetric(matrix)
    return float(np.linalg.eigvalsh(sym)[-1])


def spectral_norm(matrix) -> float:
    """Largest singular value; works for rectangular input."""
    mat = as_matrix(matrix)
    return float(np.linalg.svd(mat, compute_uv=False)[0])


class SpdFactor:
    """Cached Cholesky factorization of a symmetric positive definite matrix.

    Factor once, then solve against many right-hand sides. The factorization
    object is immutable; ``solve`` never mutates its argument.
    """

    def __init__(self, matrix):
        sym = require_symmetric(matrix)
        try:
            self._factor = scipy.linalg.cho_factor(sym, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError as err:
            raise NumericalError(f"matrix is not positive definite: {err}") from None
        self.shape = sym.shape

    def solve(self, rhs) -> np.ndarray:
        """Solve against a vector or a matrix of stacked right-hand sides."""
        rhs = np.asarray(rhs, dtype=np.float64)
        if rhs.ndim not in (1, 2) or rhs.shape[0] != self.shape[0]:
            raise ShapeError(
                f"right-hand side has shape {rhs.shape}, matrix is {self.shape}"
            )
        return scipy.linalg.cho_solve(self._factor, rhs, check_finite=False)


def solve_spd(matrix, rhs) -> np.ndarray:
    """Solve M x = b for symmetric positive definite M via Cholesky."""
    return SpdFactor(matrix).solve(as_vector(rhs))
