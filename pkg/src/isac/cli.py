"""Command line entry point: ``isac beampattern|sweep|timing|monte-carlo``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import harness
from .scenario import ConfigError, ScenarioConfig, load_scenario
from .solver_sdr import SdrOptions

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2


def parse_grid(text: str) -> np.ndarray:
    """Either ``start:stop:step`` (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            return np.arange(start, stop + step * 1e-9, step)
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use start:stop:step or a,b,c") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isac", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="YAML scenario file (defaults to the reference setup)")
    common.add_argument("--out", help="CSV output path (stdout if omitted)")
    common.add_argument("--seed", type=int, help="override channel_seed")
    common.add_argument("--tol", type=float, default=1e-7, help="SDP relative gap tolerance")
    common.add_argument("--max-iter", type=int, default=200)
    common.add_argument("--randomizations", type=int, default=1000)
    common.add_argument("--rank-one-tol", type=float, default=1e-6)
    common.add_argument("--summary", action="store_true", help="print quantiles to stdout")

    p = sub.add_parser("beampattern", parents=[common], help="transmit beampatterns of both designs")
    p.add_argument("--grid", type=parse_grid, help="angles in degrees")
    p = sub.add_parser("sweep", parents=[common], help="average MI versus P0")
    p.add_argument("--grid", type=parse_grid, help="P0 values in dBm")
    p.add_argument("--antennas", type=lambda s: [int(x) for x in s.split(",")], default=[6, 12])
    p.add_argument("--trials", type=int, default=harness.DEFAULT_TRIALS)
    p = sub.add_parser("timing", parents=[common], help="closed form versus SDR run time")
    p.add_argument("--repeats", type=int, default=30)
    p = sub.add_parser("monte-carlo", parents=[common], help="per-trial feasibility audit")
    p.add_argument("--trials", type=int, default=harness.DEFAULT_TRIALS)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_scenario(args.scenario) if args.scenario else ScenarioConfig()
        if args.seed is not None:
            cfg = cfg.replace(channel_seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    opts = SdrOptions(tol=args.tol, max_iter=args.max_iter, n_rand=args.randomizations,
                      rank_one_tol=args.rank_one_tol)

    try:
        if args.command == "beampattern":
            res = harness.run_beampattern(cfg, args.grid, opts)
            failed = bool(res.runtime["errors"])
        elif args.command == "sweep":
            res = harness.run_power_sweep(cfg, args.grid, args.antennas, args.trials, opts)
            failed = False
        elif args.command == "timing":
            res = harness.run_timing(cfg, args.repeats, opts)
            failed = False
        else:
            res = harness.run_monte_carlo(cfg, args.trials, opts)
            failed = False
    except ValueError as exc:
        if isinstance(exc, harness.SOLVER_ERRORS):
            print(f"solver failure: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        print(f"argument error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except harness.SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    text = res.to_csv(args.out)
    if args.out is None:
        sys.stdout.write(text)
    if args.summary:
        print(res.summary())
    return EXIT_SOLVER if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
