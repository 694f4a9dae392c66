"""Positive-definite kernels and inducing-point approximations.

The exact kernel is a squared exponential. Sparse approximations replace it
with the Nystrom form built from a fixed set of inducing points: the
subset-of-regressors (SoR) kernel uses the Nystrom form everywhere, while the
fully-independent-conditional (FIC) kernel restores the exact diagonal.

Point sets are float arrays of shape (N, D); a single point is a length-D
array. 1-D problems use D = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import chol_factor, chol_logdet, chol_solve


def as_points(x, dim: int | None = None) -> np.ndarray:
    """Coerce to an (N, D) array of finite coordinates."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.ndim != 2:
        raise ValueError(f"point set must be 2-D, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    if dim is not None and pts.shape[1] != dim:
        raise ValueError(f"expected points in R^{dim}, got R^{pts.shape[1]}")
    return pts


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a single length-D point."""
    p = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    if dim is not None and p.shape[0] != dim:
        raise ValueError(f"expected a point in R^{dim}, got R^{p.shape[0]}")
    return p


def _sqdist(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances between rows of X and Y."""
    diff = x[:, None, :] - y[None, :, :]
    return np.sum(diff * diff, axis=-1)


def _coincidence(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Boolean (N, M) mask of exactly equal rows."""
    return np.all(x[:, None, :] == y[None, :, :], axis=-1)


@dataclass(frozen=True)
class SquaredExponential:
    """k(x, x') = signal_variance * exp(-||x - x'||^2 / (2 lengthscale^2)).

    ``jitter`` is the absolute value added to Gram diagonals before
    factorization; ``None`` resolves to 1e-9 * signal_variance.
    """

    lengthscale: float
    signal_variance: float = 1.0
    jitter: float | None = None

    def __post_init__(self):
        if not self.lengthscale > 0:
            raise ValueError("lengthscale must be positive")
        if not self.signal_variance > 0:
            raise ValueError("signal_variance must be positive")
        if self.jitter is not None and self.jitter < 0:
            raise ValueError("jitter must be non-negative")

    @property
    def gram_jitter(self) -> float:
        return 1e-9 * self.signal_variance if self.jitter is None else self.jitter

    def pairwise(self, x, y) -> np.ndarray:
        x, y = as_points(x), as_points(y)
        if x.shape[1] != y.shape[1]:
            raise ValueError("point sets have mismatched dimensions")
        return self.signal_variance * np.exp(
            -0.5 * _sqdist(x, y) / self.lengthscale**2
        )

    def gram(self, x) -> np.ndarray:
        k = self.pairwise(x, x)
        return 0.5 * (k + k.T)

    def diag(self, x) -> np.ndarray:
        x = as_points(x)
        return np.full(x.shape[0], self.signal_variance)

    def __call__(self, x, y) -> float:
        return float(self.pairwise(as_point(x)[None, :], as_point(y)[None, :])[0, 0])


class InducingSet:
    """A fixed set of inducing points with its cached Gram factorization.

    The lower Cholesky factor of K_Z + jitter*I is computed once and shared
    by every sparse-kernel evaluation and filter step.
    """

    def __init__(self, kernel: SquaredExponential, points):
        self.kernel = kernel
        self.points = as_points(points)
        if self.points.shape[0] < 1:
            raise ValueError("need at least one inducing point")
        if len(np.unique(self.points, axis=0)) != self.points.shape[0]:
            raise ValueError("inducing points must be pairwise distinct")
        self.gram = kernel.gram(self.points)
        self.chol = chol_factor(self.gram, kernel.gram_jitter)
        self.logdet = chol_logdet(self.chol)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def solve(self, b: np.ndarray) -> np.ndarray:
        """(K_Z + jitter I)^{-1} b."""
        return chol_solve(self.chol, b)

    def cross(self, x) -> np.ndarray:
        """k_Z(x): (N, M) kernel evaluations against the inducing points."""
        return self.kernel.pairwise(as_points(x, self.dim), self.points)

    def weights(self, x) -> np.ndarray:
        """q(x) = K_Z^{-1} k_Z(x), one row per query point (N, M)."""
        return self.solve(self.cross(x).T).T


@dataclass(frozen=True)
class SubsetOfRegressors:
    """SoR kernel: k_Z(x)^T K_Z^{-1} k_Z(x') everywhere."""

    inducing: InducingSet
    base: SquaredExponential = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "base", self.inducing.kernel)

    @property
    def gram_jitter(self) -> float:
        return self.base.gram_jitter

    def pairwise(self, x, y) -> np.ndarray:
        return self.inducing.weights(x) @ self.inducing.cross(y).T

    def gram(self, x) -> np.ndarray:
        k = self.pairwise(x, x)
        return 0.5 * (k + k.T)

    def diag(self, x) -> np.ndarray:
        w = self.inducing.weights(x)
        return np.einsum("ij,ij->i", w, self.inducing.cross(x))

    def conditional_residual(self, x) -> np.ndarray:
        """k(x,x) - k_SoR(x,x), the variance lost to the approximation."""
        return np.maximum(self.base.diag(x) - self.diag(x), 0.0)

    def __call__(self, x, y) -> float:
        return float(self.pairwise(as_point(x)[None, :], as_point(y)[None, :])[0, 0])


@dataclass(frozen=True)
class FullyIndependentConditional:
    """FIC kernel: SoR off the diagonal, exact base kernel on it.

    The Kronecker delta acts on measurement indices when assembling a
    training Gram (``gram``), so repeated measurement locations stay
    non-degenerate, and on coordinates when comparing two different point
    sets (``pairwise``), so a query at a measured location sees the exact
    variance.
    """

    inducing: InducingSet
    base: SquaredExponential = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "base", self.inducing.kernel)

    @property
    def gram_jitter(self) -> float:
        return self.base.gram_jitter

    def _sor(self) -> SubsetOfRegressors:
        return SubsetOfRegressors(self.inducing)

    def pairwise(self, x, y) -> np.ndarray:
        x, y = as_points(x), as_points(y)
        k = self._sor().pairwise(x, y)
        mask = _coincidence(x, y)
        if np.any(mask):
            k = k + mask * (self.base.pairwise(x, y) - k)
        return k

    def gram(self, x) -> np.ndarray:
        x = as_points(x)
        k = self._sor().gram(x)
        np.fill_diagonal(k, self.base.diag(x))
        return k

    def diag(self, x) -> np.ndarray:
        return self.base.diag(x)

    def conditional_residual(self, x) -> np.ndarray:
        return self._sor().conditional_residual(x)

    def __call__(self, x, y) -> float:
        return float(self.pairwise(as_point(x)[None, :], as_point(y)[None, :])[0, 0])


Kernel = SquaredExponential | SubsetOfRegressors | FullyIndependentConditional
SparseKernel = SubsetOfRegressors | FullyIndependentConditional


def gram_matrix(kernel: Kernel, x) -> np.ndarray:
    """Gram matrix [k(x_i, x_j)] of a point set."""
    return kernel.gram(x)


def cross_vector(kernel: Kernel, x_set, x) -> np.ndarray:
    """Vector [k(x, x_i)] of kernel evaluations against a point set."""
    x_set = as_points(x_set)
    return kernel.pairwise(as_point(x, x_set.shape[1])[None, :], x_set)[0]
