import numpy as np
import pytest

from gpplan.kernels import InducingSet, SquaredExponential


@pytest.fixture
def kernel():
    return SquaredExponential(lengthscale=0.3)


@pytest.fixture
def inducing(kernel):
    pts = np.array([[0.2, 0.3], [0.8, 0.4], [0.5, 0.8], [0.15, 0.75]])
    return InducingSet(kernel, pts)


def spread_points(rng, n, dim=2, min_dist=0.2, box=1.0):
    """Random points with a minimum pairwise separation."""
    pts = [rng.uniform(0, box, dim)]
    while len(pts) < n:
        c = rng.uniform(0, box, dim)
        if min(np.linalg.norm(c - p) for p in pts) > min_dist:
            pts.append(c)
    return np.asarray(pts)
