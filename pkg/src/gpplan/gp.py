"""Batch GP regression and worst-case error bounds.

The noise-free posterior mean is the minimum-norm kernel interpolant, which
is what the deterministic error bounds are stated for; measurement noise
enters the bounds only through the amplification factor ``lambda_factor``.
Regression with noise on the Gram diagonal is available for the filter
oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .kernels import (
    InducingSet,
    Kernel,
    SparseKernel,
    SquaredExponential,
    SubsetOfRegressors,
    as_points,
)
from .linalg import chol_factor, chol_logdet, chol_solve, logdet_psd, symmetrize

LOG_2PI_E = float(np.log(2.0 * np.pi * np.e))


def _as_query(x, dim: int) -> tuple[np.ndarray, bool]:
    """Coerce a query to (G, D); report whether it was a single point."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    single = arr.ndim == 1
    if single:
        arr = arr.reshape(1, -1)
    return as_points(arr, dim), single


class RkhsFunction:
    """Finite kernel expansion s(x) = sum_i w_i k(x, c_i).

    Membership in the kernel's RKHS is by construction, and the norm reduces
    to the quadratic form sqrt(w^T K_c w).
    """

    def __init__(self, kernel: SquaredExponential, centers, weights):
        self.kernel = kernel
        self.centers = as_points(centers)
        self.weights = np.asarray(weights, dtype=float).reshape(-1)
        if self.weights.shape[0] != self.centers.shape[0]:
            raise ValueError("one weight per center required")

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    @cached_property
    def rkhs_norm(self) -> float:
        k = self.kernel.gram(self.centers)
        return float(np.sqrt(max(self.weights @ k @ self.weights, 0.0)))

    def __call__(self, x):
        pts, single = _as_query(x, self.dim)
        vals = self.kernel.pairwise(pts, self.centers) @ self.weights
        return float(vals[0]) if single else vals


@dataclass
class Dataset:
    """Measurement locations, values, and the noise magnitude bound."""

    locations: np.ndarray
    values: np.ndarray
    noise_bound: float = 0.0

    def __post_init__(self):
        self.locations = as_points(self.locations) if len(self.locations) else np.zeros((0, 1))
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.values.shape[0] != self.locations.shape[0]:
            raise ValueError("locations and values disagree in length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("measurement values must be finite")
        if self.noise_bound < 0:
            raise ValueError("noise_bound must be non-negative")

    @property
    def size(self) -> int:
        return self.locations.shape[0]

    @staticmethod
    def empty(dim: int, noise_bound: float = 0.0) -> "Dataset":
        return Dataset(np.zeros((0, dim)), np.zeros(0), noise_bound)


def _has_duplicate_rows(x: np.ndarray) -> bool:
    return len(np.unique(x, axis=0)) != x.shape[0]


class Posterior:
    """GP posterior closures over a dataset and kernel."""

    def __init__(self, data: Dataset, kernel: Kernel, noise_on_diag: bool):
        self.data = data
        self.kernel = kernel
        self.noise_on_diag = noise_on_diag
        self._dim = data.locations.shape[1] if data.size else None
        if data.size == 0:
            self._chol = None
            self._alpha = None
            return
        if (
            isinstance(kernel, SubsetOfRegressors)
            and not noise_on_diag
            and _has_duplicate_rows(data.locations)
        ):
            raise ValueError(
                "duplicate measurement locations are rank-deficient under the "
                "noise-free SoR kernel; add noise_on_diag or use FIC"
            )
        gram = kernel.gram(data.locations)
        if noise_on_diag:
            gram = gram + data.noise_bound**2 * np.eye(data.size)
        self._chol = chol_factor(gram, kernel.gram_jitter)
        self._alpha = chol_solve(self._chol, data.values)

    def solve_cross(self, pts: np.ndarray) -> np.ndarray:
        """K_X^{-1} k_X(x) for each query row, shape (N, G)."""
        kx = self.kernel.pairwise(self.data.locations, pts)
        return chol_solve(self._chol, kx)

    def _query(self, x) -> tuple[np.ndarray, bool]:
        pts, single = _as_query(x, self._dim if self._dim is not None else np.atleast_2d(np.asarray(x, float)).shape[-1])
        return pts, single

    def mean(self, x):
        pts, single = self._query(x)
        if self.data.size == 0:
            out = np.zeros(pts.shape[0])
        else:
            out = self.kernel.pairwise(pts, self.data.locations) @ self._alpha
        return float(out[0]) if single else out

    def variance(self, x):
        """Pointwise posterior variance sigma^2(x, x)."""
        pts, single = self._query(x)
        prior = self.kernel.diag(pts)
        if self.data.size == 0:
            out = prior
        else:
            kx = self.kernel.pairwise(self.data.locations, pts)
            out = prior - np.einsum("ng,ng->g", kx, chol_solve(self._chol, kx))
        return float(out[0]) if single else out

    def covariance(self, x, y) -> np.ndarray:
        xp, _ = self._query(x)
        yp, _ = _as_query(y, xp.shape[1])
        prior = self.kernel.pairwise(xp, yp)
        if self.data.size == 0:
            return prior
        kx = self.kernel.pairwise(self.data.locations, xp)
        ky = self.kernel.pairwise(self.data.locations, yp)
        return prior - kx.T @ chol_solve(self._chol, ky)


def batch_regress(data: Dataset, kernel: Kernel, noise_on_diag: bool = False) -> Posterior:
    """Dense GP regression; the noise-free form inverts the raw Gram."""
    return Posterior(data, kernel, noise_on_diag)


def power_function(locations, kernel: Kernel, x):
    """Noise-free posterior standard deviation given measurement locations.

    Equals the worst-case interpolation error per unit RKHS norm.
    """
    if len(locations) == 0:
        pts, single = _as_query(x, np.atleast_2d(np.asarray(x, float)).shape[-1])
        out = np.sqrt(np.maximum(kernel.diag(pts), 0.0))
        return float(out[0]) if single else out
    locations = as_points(locations)
    data = Dataset(locations, np.zeros(locations.shape[0]))
    post = batch_regress(data, kernel, noise_on_diag=False)
    var = post.variance(x)
    if np.ndim(var) == 0:
        return float(np.sqrt(max(var, 0.0)))
    return np.sqrt(np.maximum(var, 0.0))


def lambda_factor(locations, kernel: Kernel, x):
    """Euclidean norm of K_X^{-1} k_X(x); zero when there is no data."""
    if len(locations) == 0:
        pts, single = _as_query(x, np.atleast_2d(np.asarray(x, float)).shape[-1])
        return 0.0 if single else np.zeros(pts.shape[0])
    locations = as_points(locations)
    data = Dataset(locations, np.zeros(locations.shape[0]))
    post = batch_regress(data, kernel, noise_on_diag=False)
    pts, single = _as_query(x, locations.shape[1])
    w = post.solve_cross(pts)
    out = np.linalg.norm(w, axis=0)
    return float(out[0]) if single else out


def worst_case_bound(s_norm: float, data: Dataset, kernel: Kernel, x):
    """Deterministic error bound ||s|| * P_X(x) + sqrt(noise^2 N) * Lambda(x).

    Valid for any target with RKHS norm at most ``s_norm`` observed under
    noise bounded in magnitude by ``data.noise_bound``, with the posterior
    mean computed in its noise-free form.
    """
    if s_norm < 0:
        raise ValueError("s_norm must be non-negative")
    p = power_function(data.locations, kernel, x)
    lam = lambda_factor(data.locations, kernel, x)
    return s_norm * p + data.noise_bound * np.sqrt(data.size) * lam


def posterior_entropy(locations, kernel: SparseKernel, noise_variance: float = 0.0) -> float:
    """Differential entropy of the inducing values given measurements at X.

    Computed from the conditional covariance
    K_Z - K_ZX (K_X + noise I)^{-1} K_XZ under the sparse kernel, which
    equals the determinant-ratio form 0.5 log((2 pi e)^M det K_{Z u X} / det K_X).
    """
    if not isinstance(kernel, SparseKernel):
        raise TypeError("posterior entropy over inducing values needs a sparse kernel")
    ind = kernel.inducing
    m = ind.size
    if len(locations) == 0:
        return 0.5 * (m * LOG_2PI_E + logdet_psd(ind.gram))
    locations = as_points(locations, ind.dim)
    gram = kernel.gram(locations) + noise_variance * np.eye(locations.shape[0])
    chol = chol_factor(gram, kernel.gram_jitter)
    cross = kernel.pairwise(ind.points, locations)
    cond = symmetrize(ind.gram - cross @ chol_solve(chol, cross.T))
    return 0.5 * (m * LOG_2PI_E + logdet_psd(cond))


def sparse_worst_case_bound(s_norm: float, data: Dataset, kernel: SparseKernel, x):
    """Error bound for conditionally-independent kernels.

    ||s|| * P_Z(x) * exp H(y_Z | y_X) + sqrt(noise^2 N) * Lambda(x), which
    upper-bounds the full-data bound through the power-function sandwich
    P_Z <= P_X <= P_Z exp H.
    """
    if not isinstance(kernel, SparseKernel):
        raise TypeError("the sparse bound requires a SoR or FIC kernel")
    if s_norm < 0:
        raise ValueError("s_norm must be non-negative")
    ind = kernel.inducing
    p_z = power_function(ind.points, kernel, x)
    ent = posterior_entropy(data.locations, kernel)
    lam = lambda_factor(data.locations, kernel, x)
    return s_norm * p_z * np.exp(ent) + data.noise_bound * np.sqrt(data.size) * lam
