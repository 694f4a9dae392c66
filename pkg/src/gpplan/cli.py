"""Command-line entry point: run, validate, and replay experiments."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .experiments import replay_trial, run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpplan",
        description="Sparse-GP worst-case-error experiments and planning studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment described by a config file")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=None, help="output directory")
    run.add_argument("--seed", type=int, default=None, help="override the master seed")
    run.add_argument("--trials", type=int, default=None, help="override the trial count")
    run.add_argument(
        "--horizon", type=int, action="append", default=None,
        help="override planning horizons (repeatable)",
    )

    val = sub.add_parser("validate", help="check a config file against the schema")
    val.add_argument("config", type=Path)

    rep = sub.add_parser("replay", help="re-run one recorded trial and compare bytes")
    rep.add_argument("trial_dir", type=Path)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "validate":
        try:
            cfg = load_config(args.config)
        except (ConfigError, OSError) as exc:
            print(f"invalid: {exc}", file=sys.stderr)
            return 2
        print(f"ok: kind={cfg.kind} hash={cfg.config_hash}")
        return 0

    if args.command == "replay":
        try:
            mismatches = replay_trial(args.trial_dir)
        except (ConfigError, OSError, ValueError) as exc:
            print(f"replay failed: {exc}", file=sys.stderr)
            return 2
        if mismatches:
            for m in mismatches:
                print(m, file=sys.stderr)
            return 1
        print("replay matched the recorded trial byte for byte")
        return 0

    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    if args.trials is not None and cfg.flowfield is not None:
        cfg.flowfield.trials = args.trials
    if args.horizon and cfg.flowfield is not None:
        cfg.flowfield.horizons = list(args.horizon)
    try:
        cfg.validate()
    except ConfigError as exc:
        print(f"invalid config after overrides: {exc}", file=sys.stderr)
        return 2
    out_dir = args.out or (Path(cfg.out_dir) if cfg.out_dir else Path("out") / cfg.kind)
    summary = run_experiment(cfg, out_dir)
    for key, value in sorted(summary.items()):
        print(f"{key}: {value}")
    if summary.get("violations", 0):
        print("bound violated on the emitted grid", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
