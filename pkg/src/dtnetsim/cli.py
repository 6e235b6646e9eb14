"""Command-line entry points.

`dtnetsim run` executes a scenario (one mode or a both-modes comparison) and
writes records/summary files; `dtnetsim calibrate` evaluates the idle-path
oracle and emits a calibrated config fragment. Exit codes: 0 success,
1 validation error, 2 runtime or I/O error, 3 calibration infeasible.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .kernel import ConfigurationError, SimulationError
from .metrics import comparison_report, export_run, write_comparison
from .oracle import CalibrationInfeasible, calibrate
from .scenario import (ScenarioConfig, ScenarioError, parse_file,
                       with_overrides)
from .simulation import Simulation

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_CALIBRATION = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtnetsim",
        description="Three-layer digital-twin network simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and export metrics")
    run_p.add_argument("--scenario", help="scenario file (defaults if omitted)")
    run_p.add_argument("--deployment",
                       choices=["centralized", "multilayer", "both"],
                       help="override the scenario's deployment")
    run_p.add_argument("--seed", type=int, help="override the RNG seed")
    run_p.add_argument("--duration", type=float, help="override duration (s)")
    run_p.add_argument("--out", default="results", help="output directory")
    run_p.add_argument("--format", choices=["csv", "json"], default="csv",
                       help="records file format")

    cal_p = sub.add_parser("calibrate",
                           help="solve workload knobs against latency bands")
    cal_p.add_argument("--scenario", help="scenario file (defaults if omitted)")
    cal_p.add_argument("--centralized-band", nargs=2, type=float,
                       default=[0.870, 0.930], metavar=("LO", "HI"))
    cal_p.add_argument("--multilayer-band", nargs=2, type=float,
                       default=[0.330, 0.360], metavar=("LO", "HI"))
    cal_p.add_argument("--solve-for", default="cost",
                       choices=["cost", "raw_kb", "fiber_prop_ms"])
    cal_p.add_argument("--out", help="write the fragment to a new file")
    return parser


def _load(path: Optional[str]) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    return parse_file(path)


def _execute(cfg: ScenarioConfig, mode: str, out_dir: str, fmt: str):
    """Run one mode; on a runtime failure, flush partial metrics first."""
    sim = Simulation(cfg, mode)
    try:
        return sim.run()
    except SimulationError:
        partial = getattr(sim, "_result", None)
        if partial is not None:
            export_run(partial.ledger, partial.summary, out_dir, fmt)
        raise


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args.scenario)
    deployment = args.deployment or cfg.simulation.deployment
    cfg = with_overrides(cfg, seed=args.seed, duration=args.duration,
                         deployment=None if deployment == "both" else deployment)
    if deployment == "both":
        cent = _execute(cfg, "centralized", args.out, args.format)
        multi = _execute(cfg, "multilayer", args.out, args.format)
        report = comparison_report(cent.summary, multi.summary)
        paths = export_run(cent.ledger, cent.summary, args.out, args.format)
        paths += export_run(multi.ledger, multi.summary, args.out, args.format)
        paths.append(write_comparison(report, args.out))
    else:
        result = _execute(cfg, deployment, args.out, args.format)
        paths = export_run(result.ledger, result.summary, args.out, args.format)
    for path in paths:
        print(path)
    return EXIT_OK


def _cmd_calibrate(args: argparse.Namespace) -> int:
    if args.out and args.scenario and args.out == args.scenario:
        raise ConfigurationError("refusing to overwrite the input scenario")
    cfg = _load(args.scenario)
    result = calibrate(cfg, tuple(args.centralized_band),
                       tuple(args.multilayer_band), solve_for=args.solve_for)
    fragment = result.fragment()
    print(fragment)
    print(json.dumps({
        "predicted_s": result.predicted,
        "headroom_to_band_low_s": result.headroom,
        "utilization": result.utilization,
    }, indent=2))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(fragment)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_calibrate(args)
    except ScenarioError as exc:
        for err in exc.errors:
            print(f"validation error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except CalibrationInfeasible as exc:
        print(f"calibration infeasible: {exc} "
              f"(nearest achievable: {exc.nearest!r})", file=sys.stderr)
        return EXIT_CALIBRATION
    except (SimulationError, ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
