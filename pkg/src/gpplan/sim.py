"""Environment simulation: vehicle dynamics, ground-truth fields, sensing.

The vehicle is kinematic: it picks a heading and moves at constant speed
while a double-gyre current advects it. The scalar field being reconstructed
is a seeded kernel expansion, so its RKHS norm is known exactly and the
worst-case bounds are computable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gp import RkhsFunction
from .kernels import SquaredExponential, as_point, as_points
from .recursive import BeliefState, predict_field


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangular domain in R^D."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float).reshape(-1))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float).reshape(-1))
        if self.lower.shape != self.upper.shape:
            raise ValueError("lower and upper bounds disagree in dimension")
        if not np.all(self.upper > self.lower):
            raise ValueError("domain must have positive extent in every dimension")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=-1)

    def clamp(self, pts) -> np.ndarray:
        return np.clip(np.asarray(pts, dtype=float), self.lower, self.upper)

    def exterior_distance(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.linalg.norm(pts - self.clamp(pts), axis=-1)

    def grid(self, shape) -> np.ndarray:
        """Cell-centred grid of query points, shape (prod(shape), D)."""
        axes = [
            self.lower[d] + (np.arange(n) + 0.5) * (self.upper[d] - self.lower[d]) / n
            for d, n in enumerate(shape)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def sample(self, rng: np.random.Generator, n: int = 1) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(n, self.dim))


@dataclass(frozen=True)
class DoubleGyreConfig:
    """Gyre strength, vehicle speed, and timestep for the 2-D vehicle."""

    gyre_strength: float
    speed: float
    dt: float
    domain: Box

    def __post_init__(self):
        if min(self.gyre_strength, self.speed, self.dt) <= 0:
            raise ValueError("gyre_strength, speed, and dt must be positive")
        if self.domain.dim != 2:
            raise ValueError("the double-gyre vehicle lives in R^2")


def double_gyre_step(cfg: DoubleGyreConfig, state, heading: float) -> np.ndarray:
    """One Euler step of the vehicle through the steady double-gyre flow."""
    x, y = as_point(state, 2)
    flow_x = -math.sin(math.pi * x) * math.cos(math.pi * y)
    flow_y = math.cos(math.pi * x) * math.sin(math.pi * y)
    return np.array(
        [
            x + cfg.dt * (cfg.gyre_strength * flow_x + cfg.speed * math.cos(heading)),
            y + cfg.dt * (cfg.gyre_strength * flow_y + cfg.speed * math.sin(heading)),
        ]
    )


class VehicleDynamics:
    """Planner-facing dynamics: per-control stepping plus the domain."""

    def __init__(self, cfg: DoubleGyreConfig):
        self.cfg = cfg
        self.domain = cfg.domain

    def step(self, state, heading: float) -> np.ndarray:
        return double_gyre_step(self.cfg, state, heading)

    def step_many(self, state, headings) -> np.ndarray:
        x, y = as_point(state, 2)
        headings = np.asarray(headings, dtype=float)
        cfg = self.cfg
        flow_x = -math.sin(math.pi * x) * math.cos(math.pi * y)
        flow_y = math.cos(math.pi * x) * math.sin(math.pi * y)
        out = np.empty((headings.shape[0], 2))
        out[:, 0] = x + cfg.dt * (cfg.gyre_strength * flow_x + cfg.speed * np.cos(headings))
        out[:, 1] = y + cfg.dt * (cfg.gyre_strength * flow_y + cfg.speed * np.sin(headings))
        return out


@dataclass(frozen=True)
class GroundTruth:
    """The latent scalar field plus the magnitude bound on sensor noise."""

    field: RkhsFunction
    noise_bound: float

    @property
    def rkhs_norm(self) -> float:
        return self.field.rkhs_norm


def make_ground_truth(
    seed: int,
    kernel: SquaredExponential,
    num_centers: int,
    domain: Box,
    noise_bound: float,
) -> GroundTruth:
    """Seeded kernel-expansion field with centers drawn inside the domain."""
    if num_centers < 1:
        raise ValueError("need at least one center")
    rng = np.random.default_rng(seed)
    centers = domain.sample(rng, num_centers)
    weights = rng.standard_normal(num_centers)
    return GroundTruth(RkhsFunction(kernel, centers, weights), noise_bound)


def sample_measurement(truth: GroundTruth, x, rng: np.random.Generator) -> float:
    """y = s(x) + eps with eps uniform on (-noise_bound, noise_bound).

    The uniform draw keeps eps^2 < noise_bound^2, the strict bound the
    deterministic error bound assumes.
    """
    eps = rng.uniform(-truth.noise_bound, truth.noise_bound) if truth.noise_bound else 0.0
    return float(truth.field(as_point(x))) + eps


@dataclass(frozen=True)
class ErrorGrid:
    """Absolute reconstruction error sampled over a grid."""

    points: np.ndarray
    errors: np.ndarray

    @property
    def mean_abs_error(self) -> float:
        return float(np.mean(self.errors))


def evaluate_error_grid(
    truth: GroundTruth, belief: BeliefState, kernel, shape, domain: Box
) -> ErrorGrid:
    """|s(x) - posterior mean| on a cell-centred grid of the given shape."""
    pts = domain.grid(shape)
    mean, _ = predict_field(belief, pts, kernel)
    errors = np.abs(truth.field(pts) - mean)
    return ErrorGrid(pts, errors)
