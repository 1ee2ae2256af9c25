"""Shared dense linear algebra kernels for small symmetric problems.

Everything in this package funnels matrix solves through :func:`spd_solve`
so that no code path ever forms an explicit inverse; the matrices involved
are (n+p) x (n+p) with n+p around 6, so a fresh Cholesky factorization per
call is cheap.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

# Relative symmetry tolerance: the window sums are symmetric by construction,
# so anything beyond this indicates a bookkeeping bug, not roundoff.
SYMMETRY_RTOL = 1e-10


def check_symmetric(mat: np.ndarray) -> None:
    """Raise if ``mat`` is not symmetric to within :data:`SYMMETRY_RTOL`."""
    scale = max(1.0, float(np.abs(mat).max()))
    skew = float(np.abs(mat - mat.T).max())
    if skew > SYMMETRY_RTOL * scale:
        raise RuntimeError(
            f"matrix expected symmetric; max asymmetry {skew:g} exceeds "
            f"{SYMMETRY_RTOL:g} * {scale:g}"
        )


def spd_solve(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``mat @ x = rhs`` for symmetric positive definite ``mat``.

    Uses a Cholesky factorization; ``rhs`` may be a vector or a matrix of
    stacked right-hand sides.
    """
    factor = cho_factor(mat, lower=True, check_finite=False)
    return cho_solve(factor, rhs, check_finite=False)


def spd_logdet_ratio(mat: np.ndarray, lam: float) -> float:
    """log det(mat / lam) for symmetric positive definite ``mat``.

    Works on the Cholesky diagonal scaled by sqrt(lam), so a matrix equal
    to lam * I gives exactly zero and huge ``lam`` causes no cancellation.
    """
    chol = np.linalg.cholesky(mat)
    return 2.0 * float(np.sum(np.log(np.diag(chol) / np.sqrt(lam))))


def sym_min_eig(mat: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix (full eigendecomposition)."""
    return float(np.linalg.eigvalsh(mat)[0])


def spectral_norm(mat: np.ndarray) -> float:
    """Largest singular value of a matrix."""
    return float(np.linalg.norm(mat, 2))
