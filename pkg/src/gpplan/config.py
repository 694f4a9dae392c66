"""Experiment configuration: schema, JSON round-trip, and hashing.

Configs are plain JSON with nested sections. Every emitted table carries the
12-hex config hash so results stay bound to the exact configuration that
produced them; re-running the same config must reproduce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

KINDS = ("bound_demo_1d", "flowfield_entropy_min", "flowfield_entropy_max")


class ConfigError(ValueError):
    """A configuration file violated the schema."""


@dataclass
class KernelConfig:
    lengthscale: float
    signal_variance: float = 1.0
    jitter: float | None = None

    def validate(self):
        if not self.lengthscale > 0:
            raise ConfigError("kernel.lengthscale must be positive")
        if not self.signal_variance > 0:
            raise ConfigError("kernel.signal_variance must be positive")
        if self.jitter is not None and self.jitter < 0:
            raise ConfigError("kernel.jitter must be non-negative")


@dataclass
class BoundDemoConfig:
    domain: list = field(default_factory=lambda: [[0.0, 1.0]])
    grid: int = 200
    measurements: int = 10
    # stratified: one uniform draw per equal-width stratum (keeps the Gram
    # well conditioned); uniform: iid draws; grid: measure every grid point.
    measurement_layout: str = "stratified"
    noise_bound: float = 0.1
    target_centers: int = 7

    def validate(self):
        if len(self.domain) != 1 or len(self.domain[0]) != 2:
            raise ConfigError("bound_demo.domain must be a single [lo, hi] interval")
        if self.domain[0][0] >= self.domain[0][1]:
            raise ConfigError("bound_demo.domain must have positive length")
        if self.grid < 2:
            raise ConfigError("bound_demo.grid must be at least 2")
        if self.measurement_layout not in ("stratified", "uniform", "grid"):
            raise ConfigError(
                "bound_demo.measurement_layout must be 'stratified', 'uniform', or 'grid'"
            )
        if self.measurements < 0 or self.noise_bound < 0 or self.target_centers < 1:
            raise ConfigError("bound_demo has a negative or empty field")


@dataclass
class FlowFieldConfig:
    domain: list = field(default_factory=lambda: [[0.0, 2.0], [0.0, 1.0]])
    gyre_strength: float = 0.3
    speed: float = 0.2
    dt: float = 0.1
    inducing_shape: list = field(default_factory=lambda: [3, 3])
    # border fraction of each axis left free of inducing points
    inducing_margin: float = 0.25
    variant: str = "fic"  # sparse approximation used by the filter
    noise_bound: float = 0.05
    error_grid: list = field(default_factory=lambda: [30, 30])
    target_centers: int = 12
    horizons: list = field(default_factory=lambda: [1, 5, 10])
    steps: int = 100
    delta: float = 0.01
    epsilon: float = math.inf
    control_count: int = 8
    trials: int = 20

    def validate(self):
        if len(self.domain) != 2 or any(len(b) != 2 or b[0] >= b[1] for b in self.domain):
            raise ConfigError("flowfield.domain must be [[x0,x1],[y0,y1]] with positive extent")
        if min(self.gyre_strength, self.speed, self.dt) <= 0:
            raise ConfigError("flowfield dynamics parameters must be positive")
        if len(self.inducing_shape) != 2 or min(self.inducing_shape) < 1:
            raise ConfigError("flowfield.inducing_shape must be two positive counts")
        if not 0.0 < self.inducing_margin < 0.5:
            raise ConfigError("flowfield.inducing_margin must lie in (0, 0.5)")
        if self.variant not in ("sor", "fic"):
            raise ConfigError("flowfield.variant must be 'sor' or 'fic'")
        if len(self.error_grid) != 2 or min(self.error_grid) < 1:
            raise ConfigError("flowfield.error_grid must be two positive counts")
        if not self.horizons or any(int(h) < 1 for h in self.horizons):
            raise ConfigError("flowfield.horizons must be positive integers")
        if self.steps < 0 or self.trials < 1 or self.control_count < 1:
            raise ConfigError("flowfield.steps/trials/control_count out of range")
        if self.delta < 0 or self.epsilon < 0:
            raise ConfigError("flowfield.delta and epsilon must be non-negative")
        if self.noise_bound <= 0:
            raise ConfigError("flowfield.noise_bound must be positive")
        if self.target_centers < 1:
            raise ConfigError("flowfield.target_centers must be positive")


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    out_dir: str | None = None
    kernel: KernelConfig = field(default_factory=lambda: KernelConfig(lengthscale=0.2))
    bound_demo: BoundDemoConfig | None = None
    flowfield: FlowFieldConfig | None = None

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        self.kernel.validate()
        if self.kind == "bound_demo_1d":
            if self.bound_demo is None:
                raise ConfigError("bound_demo section required for bound_demo_1d")
            self.bound_demo.validate()
        else:
            if self.flowfield is None:
                raise ConfigError(f"flowfield section required for {self.kind}")
            self.flowfield.validate()

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.bound_demo is None:
            d.pop("bound_demo")
        if self.flowfield is None:
            d.pop("flowfield")
        else:
            if math.isinf(self.flowfield.epsilon):
                d["flowfield"]["epsilon"] = "inf"
        return d

    @property
    def config_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def _build_section(cls, data: dict, name: str):
    if not isinstance(data, dict):
        raise ConfigError(f"section '{name}' must be an object")
    fields = {f for f in cls.__dataclass_fields__}
    unknown = set(data) - fields
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {sorted(unknown)}")
    return cls(**data)


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    data = dict(data)
    stated_hash = data.pop("config_hash", None)
    known = {"kind", "seed", "out_dir", "kernel", "bound_demo", "flowfield"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    if "kind" not in data:
        raise ConfigError("missing required key 'kind'")
    kernel = _build_section(KernelConfig, data.get("kernel", {"lengthscale": 0.2}), "kernel")
    bound_demo = flowfield = None
    if "bound_demo" in data:
        bound_demo = _build_section(BoundDemoConfig, data["bound_demo"], "bound_demo")
    if "flowfield" in data:
        ff = dict(data["flowfield"])
        if ff.get("epsilon") == "inf":
            ff["epsilon"] = math.inf
        flowfield = _build_section(FlowFieldConfig, ff, "flowfield")
    cfg = ExperimentConfig(
        kind=data["kind"],
        seed=int(data.get("seed", 0)),
        out_dir=data.get("out_dir"),
        kernel=kernel,
        bound_demo=bound_demo,
        flowfield=flowfield,
    )
    if cfg.kind == "bound_demo_1d" and cfg.bound_demo is None:
        cfg.bound_demo = BoundDemoConfig()
    if cfg.kind.startswith("flowfield") and cfg.flowfield is None:
        cfg.flowfield = FlowFieldConfig()
    cfg.validate()
    if stated_hash is not None and stated_hash != cfg.config_hash:
        raise ConfigError(
            f"config_hash {stated_hash!r} does not match the content hash {cfg.config_hash!r}"
        )
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return config_from_dict(data)


def save_config(cfg: ExperimentConfig, path) -> None:
    doc = cfg.to_dict()
    doc["config_hash"] = cfg.config_hash
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
