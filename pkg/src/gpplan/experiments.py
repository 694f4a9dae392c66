"""Experiment suites: 1-D bound demo, flow-field study, baseline comparison.

Every run writes plain-text delimited tables plus a resolved-config snapshot
into the output directory. All randomness flows from the master seed through
named per-trial streams, so identical configs reproduce identical bytes and
any single trial can be replayed in isolation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, FlowFieldConfig, save_config
from .gp import Dataset, RkhsFunction, batch_regress, power_function, worst_case_bound
from .kernels import FullyIndependentConditional, InducingSet, SquaredExponential, SubsetOfRegressors
from .planner import (
    MeasurementEntropyCost,
    PlannerSettings,
    PlanningEnv,
    PosteriorEntropyCost,
    PrunerConfig,
    TrialRecord,
    plan_and_execute,
)
from .recursive import init_belief, predict_field
from .sim import Box, DoubleGyreConfig, GroundTruth, VehicleDynamics, evaluate_error_grid, make_ground_truth, sample_measurement


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def write_table(path: Path, columns: list[str], rows) -> None:
    lines = [",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def read_table(path: Path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


def _kernel_from_config(cfg: ExperimentConfig) -> SquaredExponential:
    return SquaredExponential(
        lengthscale=cfg.kernel.lengthscale,
        signal_variance=cfg.kernel.signal_variance,
        jitter=cfg.kernel.jitter,
    )


# ---------------------------------------------------------------------------
# 1-D bound demo
# ---------------------------------------------------------------------------


def run_bound_demo(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """Emit the grid table behind the 1-D bound figures; returns a summary
    whose 'violations' entry counts grid points with error above the bound."""
    bd = cfg.bound_demo
    out_dir.mkdir(parents=True, exist_ok=True)
    kernel = _kernel_from_config(cfg)
    lo, hi = bd.domain[0]
    grid = np.linspace(lo, hi, bd.grid)[:, None]

    centers = np.linspace(lo, hi, bd.target_centers)[:, None]
    weights = np.random.default_rng((cfg.seed, 0)).standard_normal(bd.target_centers)
    target = RkhsFunction(kernel, centers, weights)

    if bd.measurement_layout == "grid":
        locations = grid.copy()
    elif bd.measurement_layout == "uniform":
        locations = np.sort(
            np.random.default_rng((cfg.seed, 1)).uniform(lo, hi, bd.measurements)
        )[:, None]
    else:
        n = bd.measurements
        offsets = np.random.default_rng((cfg.seed, 1)).uniform(0.0, 1.0, n)
        locations = (lo + (np.arange(n) + offsets) * (hi - lo) / n)[:, None]
    noise = np.random.default_rng((cfg.seed, 2)).uniform(
        -bd.noise_bound, bd.noise_bound, locations.shape[0]
    ) if bd.noise_bound else np.zeros(locations.shape[0])
    values = target(locations) + noise
    data = Dataset(locations, values, bd.noise_bound)

    post = batch_regress(data, kernel, noise_on_diag=False)
    truth_vals = target(grid)
    mean = post.mean(grid)
    sd = power_function(locations, kernel, grid)
    bound = worst_case_bound(target.rkhs_norm, data, kernel, grid)
    err = np.abs(truth_vals - mean)
    # 1e-9 slack in field units so exact-interpolation cases are not flagged
    # for one-ulp round-off above a bound that is mathematically zero
    violations = int(np.sum(err > bound + 1e-9))

    h = cfg.config_hash
    write_table(
        out_dir / "grid.csv",
        ["x", "truth", "mean", "sd", "bound", "abs_error", "config_hash"],
        [
            [float(grid[i, 0]), float(truth_vals[i]), float(mean[i]), float(sd[i]),
             float(bound[i]), float(err[i]), h]
            for i in range(grid.shape[0])
        ],
    )
    write_table(
        out_dir / "measurements.csv",
        ["x", "y", "config_hash"],
        [[float(locations[i, 0]), float(values[i]), h] for i in range(data.size)],
    )
    summary = {
        "violations": violations,
        "rkhs_norm": target.rkhs_norm,
        "max_abs_error": float(err.max()),
        "min_bound_margin": float((bound - err).min()),
        "ci_exceedances_within_bound": int(np.sum((err > sd) & (err <= bound))),
        "config_hash": h,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    save_config(cfg, out_dir / "resolved_config.json")
    return summary


# ---------------------------------------------------------------------------
# flow-field study (entropy minimisation and the max-entropy baseline)
# ---------------------------------------------------------------------------


@dataclass
class FlowFieldSetup:
    """Everything one trial needs, derived once per experiment."""

    kernel: SquaredExponential
    inducing: InducingSet
    sparse: SubsetOfRegressors | FullyIndependentConditional
    truth: GroundTruth
    dynamics: VehicleDynamics
    domain: Box
    controls: np.ndarray
    grid_shape: tuple


def _inducing_grid(domain: Box, shape, margin: float) -> np.ndarray:
    axes = [
        domain.lower[d]
        + (domain.upper[d] - domain.lower[d])
        * (np.linspace(margin, 1.0 - margin, n) if n > 1 else np.array([0.5]))
        for d, n in enumerate(shape)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def build_flowfield_setup(cfg: ExperimentConfig, truth: GroundTruth | None = None) -> FlowFieldSetup:
    ff = cfg.flowfield
    kernel = _kernel_from_config(cfg)
    domain = Box([b[0] for b in ff.domain], [b[1] for b in ff.domain])
    inducing = InducingSet(kernel, _inducing_grid(domain, ff.inducing_shape, ff.inducing_margin))
    sparse = (
        FullyIndependentConditional(inducing)
        if ff.variant == "fic"
        else SubsetOfRegressors(inducing)
    )
    if truth is None:
        truth = make_ground_truth((cfg.seed, 3), kernel, ff.target_centers, domain, ff.noise_bound)
    dynamics = VehicleDynamics(
        DoubleGyreConfig(gyre_strength=ff.gyre_strength, speed=ff.speed, dt=ff.dt, domain=domain)
    )
    controls = np.arange(ff.control_count) * (2.0 * np.pi / ff.control_count)
    return FlowFieldSetup(
        kernel, inducing, sparse, truth, dynamics, domain, controls, tuple(ff.error_grid)
    )


def _cost_model(kind: str, setup: FlowFieldSetup, noise_bound: float):
    if kind == "flowfield_entropy_max":
        return MeasurementEntropyCost(setup.kernel, noise_bound)
    return PosteriorEntropyCost()


def run_flow_trial(
    setup: FlowFieldSetup, cfg: ExperimentConfig, horizon: int, trial: int
) -> TrialRecord:
    ff = cfg.flowfield
    rng_meas = np.random.default_rng((cfg.seed, trial, 1))
    x0 = setup.domain.sample(np.random.default_rng((cfg.seed, trial, 2)))[0]
    env = PlanningEnv(
        dynamics=setup.dynamics,
        kernel=setup.sparse,
        noise_bound=ff.noise_bound,
        cost_model=_cost_model(cfg.kind, setup, ff.noise_bound),
        observe=lambda x: sample_measurement(setup.truth, x, rng_meas),
    )
    settings = PlannerSettings(
        horizon=horizon,
        steps=ff.steps,
        pruner=PrunerConfig(delta=ff.delta, epsilon=ff.epsilon, controls=setup.controls),
    )

    def metrics(belief):
        eg = evaluate_error_grid(setup.truth, belief, setup.sparse, setup.grid_shape, setup.domain)
        return {"mean_abs_error": eg.mean_abs_error}

    return plan_and_execute(x0, init_belief(setup.inducing), env, settings, metrics)


def _trial_tables(record: TrialRecord, setup: FlowFieldSetup, h: str):
    step_rows = []
    for row in record.steps:
        step_rows.append(
            [row.step, float(row.state[0]), float(row.state[1]),
             None if row.action is None else float(row.action),
             None if row.measurement is None else float(row.measurement),
             row.entropy, row.metrics["mean_abs_error"], row.expanded, row.pruned, h]
        )
    pts = setup.domain.grid(setup.grid_shape)
    mean, var = predict_field(record.final_belief, pts, setup.sparse)
    field_rows = [
        [float(pts[i, 0]), float(pts[i, 1]), float(mean[i]), float(var[i]), h]
        for i in range(pts.shape[0])
    ]
    belief_doc = {
        "mu": [float(v) for v in record.final_belief.mu],
        "sigma": [[float(v) for v in r] for r in record.final_belief.sigma],
        "step": record.final_belief.step,
        "config_hash": h,
    }
    return step_rows, field_rows, belief_doc


STEP_COLUMNS = [
    "step", "x", "y", "action", "measurement", "entropy", "mean_abs_error",
    "expanded", "pruned", "config_hash",
]
FIELD_COLUMNS = ["x", "y", "mean", "variance", "config_hash"]


def write_trial(trial_dir: Path, record: TrialRecord, setup: FlowFieldSetup, h: str) -> None:
    trial_dir.mkdir(parents=True, exist_ok=True)
    step_rows, field_rows, belief_doc = _trial_tables(record, setup, h)
    write_table(trial_dir / "steps.csv", STEP_COLUMNS, step_rows)
    write_table(trial_dir / "final_field.csv", FIELD_COLUMNS, field_rows)
    (trial_dir / "belief.json").write_text(json.dumps(belief_doc, indent=2) + "\n")
    meta = {
        "wall_time_s": record.wall_time,
        "nodes_expanded": record.nodes_expanded,
        "nodes_pruned": record.nodes_pruned,
    }
    (trial_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def _aggregate(per_horizon: dict, h: str):
    rows = []
    for horizon in sorted(per_horizon):
        trials = per_horizon[horizon]  # list of (mae per step, entropy per step)
        mae = np.asarray([t[0] for t in trials])
        ent = np.asarray([t[1] for t in trials])
        n = mae.shape[0]
        ci = 1.96 * mae.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(mae.shape[1])
        for step in range(mae.shape[1]):
            rows.append(
                [horizon, step, float(mae[:, step].mean()), float(ci[step]),
                 float(ent[:, step].mean()), h]
            )
    return rows


AGGREGATE_COLUMNS = ["horizon", "step", "mae_mean", "mae_ci95", "entropy_mean", "config_hash"]


def serialize_ground_truth(setup: FlowFieldSetup, h: str) -> dict:
    return {
        "kernel": {
            "lengthscale": setup.kernel.lengthscale,
            "signal_variance": setup.kernel.signal_variance,
            "jitter": setup.kernel.jitter,
        },
        "centers": [[float(v) for v in c] for c in setup.truth.field.centers],
        "weights": [float(v) for v in setup.truth.field.weights],
        "noise_bound": setup.truth.noise_bound,
        "rkhs_norm": setup.truth.rkhs_norm,
        "inducing": [[float(v) for v in p] for p in setup.inducing.points],
        "config_hash": h,
    }


def ground_truth_from_doc(doc: dict) -> GroundTruth:
    kernel = SquaredExponential(
        lengthscale=doc["kernel"]["lengthscale"],
        signal_variance=doc["kernel"]["signal_variance"],
        jitter=doc["kernel"]["jitter"],
    )
    field = RkhsFunction(kernel, np.asarray(doc["centers"]), np.asarray(doc["weights"]))
    return GroundTruth(field, doc["noise_bound"])


def run_flowfield(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """Run trials x horizons under the configured planning cost."""
    ff = cfg.flowfield
    out_dir.mkdir(parents=True, exist_ok=True)
    setup = build_flowfield_setup(cfg)
    h = cfg.config_hash

    pts = setup.domain.grid(setup.grid_shape)
    truth_vals = setup.truth.field(pts)
    write_table(
        out_dir / "truth_grid.csv",
        ["x", "y", "value", "config_hash"],
        [[float(pts[i, 0]), float(pts[i, 1]), float(truth_vals[i]), h] for i in range(pts.shape[0])],
    )
    write_table(
        out_dir / "inducing.csv",
        ["x", "y", "config_hash"],
        [[float(p[0]), float(p[1]), h] for p in setup.inducing.points],
    )
    (out_dir / "ground_truth.json").write_text(
        json.dumps(serialize_ground_truth(setup, h), indent=2) + "\n"
    )
    save_config(cfg, out_dir / "resolved_config.json")

    per_horizon: dict[int, list] = {}
    for horizon in ff.horizons:
        per_horizon[int(horizon)] = []
        for trial in range(ff.trials):
            record = run_flow_trial(setup, cfg, int(horizon), trial)
            trial_dir = out_dir / f"horizon_{int(horizon):02d}" / f"trial_{trial:02d}"
            write_trial(trial_dir, record, setup, h)
            per_horizon[int(horizon)].append(
                (
                    [r.metrics["mean_abs_error"] for r in record.steps],
                    [r.entropy for r in record.steps],
                )
            )
    write_table(out_dir / "aggregate.csv", AGGREGATE_COLUMNS, _aggregate(per_horizon, h))
    return {"config_hash": h, "horizons": [int(x) for x in ff.horizons], "trials": ff.trials}


def run_experiment(cfg: ExperimentConfig, out_dir) -> dict:
    out_dir = Path(out_dir)
    if cfg.kind == "bound_demo_1d":
        return run_bound_demo(cfg, out_dir)
    return run_flowfield(cfg, out_dir)


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


def replay_trial(trial_dir) -> list[str]:
    """Re-run one recorded trial and byte-compare its deterministic tables.

    Returns a list of mismatch descriptions (empty means exact replay).
    """
    from .config import load_config

    trial_dir = Path(trial_dir)
    horizon = int(trial_dir.parent.name.split("_")[1])
    trial = int(trial_dir.name.split("_")[1])
    root = trial_dir.parent.parent
    cfg = load_config(root / "resolved_config.json")
    gt_doc = json.loads((root / "ground_truth.json").read_text())
    setup = build_flowfield_setup(cfg, truth=ground_truth_from_doc(gt_doc))
    record = run_flow_trial(setup, cfg, horizon, trial)
    step_rows, field_rows, belief_doc = _trial_tables(record, setup, cfg.config_hash)

    mismatches = []

    def compare(name: str, fresh: str):
        on_disk = (trial_dir / name).read_text()
        if on_disk != fresh:
            mismatches.append(f"{name} differs from the recorded run")

    lines = [",".join(STEP_COLUMNS)] + [",".join(_fmt(v) for v in r) for r in step_rows]
    compare("steps.csv", "\n".join(lines) + "\n")
    lines = [",".join(FIELD_COLUMNS)] + [",".join(_fmt(v) for v in r) for r in field_rows]
    compare("final_field.csv", "\n".join(lines) + "\n")
    compare("belief.json", json.dumps(belief_doc, indent=2) + "\n")
    return mismatches
