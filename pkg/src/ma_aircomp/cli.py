"""Command-line entry point for the experiment sweeps.

Subcommands: ``power-sweep``, ``user-sweep``, ``aoa-sweep``, ``converge`` and
``gain-map``, each reading a JSON config and writing CSV.  Exit codes: 0 on
success, 2 on config errors, 3 when every cell of a sweep failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import harness
from .channel import channel_gain_map, write_gain_map_csv
from .pso import write_pso_trace_csv


def _load_config(path, seed_override):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise SystemExit2(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise SystemExit2(f"malformed JSON in {path}: {exc}")
    try:
        config = harness.ExperimentConfig.from_dict(doc)
    except (TypeError, ValueError) as exc:
        raise SystemExit2(f"invalid config {path}: {exc}")
    if seed_override is not None:
        config = harness.with_seed(config, seed_override)
    return config


class SystemExit2(Exception):
    """Config-level failure (exit code 2)."""


def _write_sweep(records, out_path, timing):
    if records and all(math.isnan(rec.cmse) for rec in records):
        harness.write_records_csv(out_path, records, include_timing=timing)
        print("error: every sweep cell failed", file=sys.stderr)
        return 3
    harness.write_records_csv(out_path, records, include_timing=timing)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ma-aircomp",
        description="Movable-antenna AirComp experiment sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("power-sweep", "user-sweep", "aoa-sweep", "converge", "gain-map"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--timing", action="store_true",
                       help="write measured wall times (breaks byte-identical reruns)")

    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config, args.seed)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "power-sweep":
            return _write_sweep(harness.run_power_sweep(config), args.out, args.timing)
        if args.command == "user-sweep":
            return _write_sweep(harness.run_user_sweep(config), args.out, args.timing)
        if args.command == "aoa-sweep":
            return _write_sweep(harness.run_aoa_error_sweep(config), args.out, args.timing)
        if args.command == "converge":
            trace = harness.run_convergence_trace(config)
            write_pso_trace_csv(args.out, trace)
            return 0
        if args.command == "gain-map":
            realization = harness._realization_for_seed(config, 0, config.k_users)
            xs, ys, gain = channel_gain_map(
                realization, config.region, config.gain_map_step
            )
            write_gain_map_csv(args.out, xs, ys, gain)
            return 0
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
