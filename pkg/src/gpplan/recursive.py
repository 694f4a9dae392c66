"""Fixed-dimension recursive filter over the inducing measurements.

The belief (mu, sigma) over the M inducing values is updated with a scalar
Kalman step per measurement, so the per-step cost is O(M^2) no matter how
many measurements have been absorbed. The covariance half of the update does
not depend on measured values, which is what lets a planner roll beliefs
forward without sensing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gp import LOG_2PI_E
from .kernels import (
    FullyIndependentConditional,
    InducingSet,
    SparseKernel,
    as_point,
    as_points,
)
from .linalg import chol_logdet, robust_cholesky, symmetrize


@dataclass(frozen=True)
class BeliefState:
    """Posterior mean and covariance of the inducing measurements."""

    mu: np.ndarray
    sigma: np.ndarray
    step: int
    inducing: InducingSet

    @property
    def size(self) -> int:
        return self.mu.shape[0]


@dataclass(frozen=True)
class MeasurementPrediction:
    """Predictive moments for one upcoming scalar measurement."""

    mean: float
    variance: float
    cross: np.ndarray  # covariance row against the inducing values


def init_belief(inducing: InducingSet) -> BeliefState:
    """Prior belief: zero mean, covariance K_Z."""
    m = inducing.size
    return BeliefState(np.zeros(m), inducing.gram.copy(), 0, inducing)


def _check_kernel(belief: BeliefState, kernel: SparseKernel) -> None:
    if not isinstance(kernel, SparseKernel):
        raise TypeError("the recursive filter works on SoR or FIC kernels")
    if kernel.inducing is not belief.inducing:
        raise ValueError("kernel and belief use different inducing sets")


def predict(
    belief: BeliefState, x, kernel: SparseKernel, noise_bound: float = 0.0
) -> MeasurementPrediction:
    """Predictive mean/variance/cross-covariance of a measurement at x."""
    _check_kernel(belief, kernel)
    pt = as_point(x, belief.inducing.dim)
    q = belief.inducing.weights(pt[None, :])[0]
    cross = q @ belief.sigma
    variance = float(cross @ q) + noise_bound**2
    if _is_fic(kernel):
        variance += float(kernel.conditional_residual(pt[None, :])[0])
    return MeasurementPrediction(float(q @ belief.mu), variance, cross)


def _is_fic(kernel: SparseKernel) -> bool:
    return isinstance(kernel, FullyIndependentConditional)


def update(belief: BeliefState, pred: MeasurementPrediction, y: float) -> BeliefState:
    """Scalar Kalman update; the covariance shrinks by a PSD rank-1 term."""
    if not pred.variance > 0:
        raise ValueError("non-positive innovation variance: numerical breakdown")
    gain = pred.cross / pred.variance
    mu = belief.mu + gain * (float(y) - pred.mean)
    sigma = symmetrize(belief.sigma - np.outer(gain, pred.cross))
    return BeliefState(mu, sigma, belief.step + 1, belief.inducing)


def entropy_cost(sigma: np.ndarray) -> float:
    """c(Sigma) = 0.5 log det(2 pi e Sigma)."""
    sigma = np.asarray(sigma, dtype=float)
    m = sigma.shape[0]
    return 0.5 * (m * LOG_2PI_E + chol_logdet(robust_cholesky(sigma)))


def predict_field(belief: BeliefState, x, kernel: SparseKernel):
    """Posterior field mean and pointwise variance at query locations."""
    _check_kernel(belief, kernel)
    pts = as_points(np.atleast_2d(np.asarray(x, dtype=float)), belief.inducing.dim)
    q = belief.inducing.weights(pts)
    mean = q @ belief.mu
    var = np.einsum("gm,mn,gn->g", q, belief.sigma, q)
    var = var + kernel.conditional_residual(pts) if _is_fic(kernel) else var
    return mean, var


def field_covariance(belief: BeliefState, x, y, kernel: SparseKernel) -> np.ndarray:
    """Posterior field cross-covariance matrix between two query sets."""
    _check_kernel(belief, kernel)
    xp = as_points(np.atleast_2d(np.asarray(x, dtype=float)), belief.inducing.dim)
    yp = as_points(np.atleast_2d(np.asarray(y, dtype=float)), belief.inducing.dim)
    qx = belief.inducing.weights(xp)
    qy = belief.inducing.weights(yp)
    cov = qx @ belief.sigma @ qy.T
    if _is_fic(kernel):
        mask = np.all(xp[:, None, :] == yp[None, :, :], axis=-1)
        if np.any(mask):
            resid = kernel.conditional_residual(xp)
            cov = cov + mask * resid[:, None]
    return cov
