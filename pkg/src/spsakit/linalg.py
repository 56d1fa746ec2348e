"""Dense hermitian-matrix utilities for preconditioned stochastic optimizers.

All matrices here are small (p up to a few hundred), so a single spectral
decomposition is the workhorse behind every operation.  Real symmetric
matrices flow through the same code paths as complex hermitian ones; callers
never need a separate real-field implementation.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve

__all__ = ["hermitize", "matrix_abs", "psd_sqrt_shifted", "solve_pd"]

# Inputs arrive from exact arithmetic on function values, so deviations from
# hermiticity beyond this are programming errors, not roundoff.
HERMITICITY_ATOL = 1e-12


def hermitize(matrix):
    """Return the hermitian part (M + M†)/2 of a square matrix.

    For real inputs this reduces to the symmetric part (M + Mᵀ)/2.

    Raises
    ------
    ValueError
        If the input is not a square matrix.
    """
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return (m + m.conj().T) / 2


def _require_hermitian(m, op):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{op}: expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if np.abs(m - m.conj().T).max(initial=0.0) > HERMITICITY_ATOL * scale:
        raise ValueError(f"{op}: matrix is not hermitian within {HERMITICITY_ATOL}")


def matrix_abs(matrix):
    """Matrix absolute value √(M²) of a hermitian matrix.

    Computed as U diag(|λ|) U† from the spectral decomposition, so the result
    shares the eigenbasis of M and is positive semidefinite.
    """
    m = np.asarray(matrix)
    _require_hermitian(m, "matrix_abs")
    w, u = np.linalg.eigh(m)
    return (u * np.abs(w)) @ u.conj().T


def psd_sqrt_shifted(matrix, epsilon):
    """Return √(M² + εI) for hermitian M and ε > 0.

    Every eigenvalue of the result is at least √ε, which makes the output
    strictly positive-definite even when M vanishes.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    m = np.asarray(matrix)
    _require_hermitian(m, "psd_sqrt_shifted")
    w, u = np.linalg.eigh(m)
    return (u * np.sqrt(w * w + epsilon)) @ u.conj().T


def solve_pd(matrix, rhs):
    """Solve H x = v for positive-definite hermitian H without forming H⁻¹.

    Uses a Cholesky factorization; a non-positive-definite input raises
    ``numpy.linalg.LinAlgError`` (via scipy), which downstream code treats as
    a post-processing bug rather than a recoverable condition.
    """
    h = np.asarray(matrix)
    v = np.asarray(rhs)
    factor = cho_factor(h, lower=True)
    return cho_solve(factor, v)
