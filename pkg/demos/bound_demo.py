"""Worst-case error bounds for 1-D GP regression
================================================

Builds a target function inside the kernel's RKHS, takes a handful of noisy
measurements, and compares the actual reconstruction error against the
deterministic bound and the usual 1-sigma confidence interval.
"""

import numpy as np

from gpplan import Dataset, RkhsFunction, SquaredExponential, batch_regress
from gpplan.gp import power_function, worst_case_bound

rng = np.random.default_rng(7)
kernel = SquaredExponential(lengthscale=0.15)

# A target with a known RKHS norm: a short kernel expansion.
target = RkhsFunction(kernel, rng.uniform(0, 1, (7, 1)), rng.standard_normal(7))
print(f"target RKHS norm: {target.rkhs_norm:.3f}")

# Noisy measurements with a *bounded* error: |eps| < 0.1 strictly.
# One draw per stratum keeps the measurement set spread out.
noise_bound = 0.1
x = ((np.arange(12) + rng.uniform(0, 1, 12)) / 12)[:, None]
y = target(x) + rng.uniform(-noise_bound, noise_bound, 12)
data = Dataset(x, y, noise_bound)

# The bounds are stated for the noise-free-form interpolant.
posterior = batch_regress(data, kernel)

grid = np.linspace(0, 1, 50)[:, None]
err = np.abs(target(grid) - posterior.mean(grid))
sigma = power_function(x, kernel, grid)
bound = worst_case_bound(target.rkhs_norm, data, kernel, grid)

print(f"\n{'x':>6} {'|error|':>9} {'1 sigma':>9} {'bound':>9}")
for i in range(0, 50, 5):
    marker = "  <- error above 1 sigma, still below the bound" if sigma[i] < err[i] <= bound[i] else ""
    print(f"{grid[i,0]:6.2f} {err[i]:9.4f} {sigma[i]:9.4f} {bound[i]:9.4f}{marker}")

print(f"\nbound violations on the grid: {int(np.sum(err > bound))}")
print(f"points where the error leaves the 1-sigma band: {int(np.sum(err > sigma))}")
