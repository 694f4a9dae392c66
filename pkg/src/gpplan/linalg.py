"""Cholesky-based helpers for symmetric positive (semi-)definite matrices."""

from __future__ import annotations

import numpy as np
import scipy.linalg as la


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return 0.5 * (A + A^T)."""
    return 0.5 * (a + a.T)


def chol_factor(a: np.ndarray, jitter: float = 0.0):
    """Lower Cholesky factor of A + jitter*I.

    Raises scipy.linalg.LinAlgError when the jittered matrix is not
    positive definite; callers treat that as an ill-conditioned input.
    """
    a = np.asarray(a, dtype=float)
    if jitter:
        a = a + jitter * np.eye(a.shape[0])
    return la.cholesky(a, lower=True)


def chol_solve(lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b given the lower Cholesky factor of A."""
    y = la.solve_triangular(lower, b, lower=True, check_finite=False)
    return la.solve_triangular(lower.T, y, lower=False, check_finite=False)


def chol_logdet(lower: np.ndarray) -> float:
    """log det A from its lower Cholesky factor."""
    return 2.0 * float(np.sum(np.log(np.diag(lower))))


def robust_cholesky(a: np.ndarray, initial_jitter: float = 0.0, max_tries: int = 8):
    """Cholesky with escalating diagonal jitter.

    Starts from ``initial_jitter`` (absolute) and multiplies by 10 up to
    ``max_tries`` times, scaled against the mean diagonal. Intended for
    covariance matrices that are PSD up to round-off; genuinely indefinite
    input still raises.
    """
    a = np.asarray(a, dtype=float)
    try:
        return la.cholesky(a, lower=True)
    except la.LinAlgError:
        pass
    scale = max(float(np.mean(np.diag(a))), np.finfo(float).tiny)
    jit = initial_jitter if initial_jitter > 0 else 1e-14 * scale
    eye = np.eye(a.shape[0])
    for _ in range(max_tries):
        try:
            return la.cholesky(a + jit * eye, lower=True)
        except la.LinAlgError:
            jit *= 10.0
    raise la.LinAlgError("matrix is not positive definite even after jitter")


def logdet_psd(a: np.ndarray) -> float:
    """log det of a PSD matrix via robust Cholesky."""
    return chol_logdet(robust_cholesky(a))
