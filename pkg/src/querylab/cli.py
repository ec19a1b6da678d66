"""Command-line entry point: ``querylab <experiment> [options]``.

Exit status is 0 when the run passes (or has no pass criterion), 2 when an
acceptance check fails and 1 on any error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import QueryLabError
from .experiments import EXPERIMENTS, FORMATS, SOLVERS, ExperimentConfig, run_experiment
from .rng import SEED_ENV

log = logging.getLogger("querylab")


def _grid(text: str) -> tuple:
    try:
        return tuple(float(t) if "." in t else int(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must be a comma-separated list of numbers: {text!r}") from exc


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="querylab", description="Seeded experiments in the matrix-vector query model.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--d", type=int, default=64, help="ambient dimension")
    p.add_argument("--s", type=int, default=None, help="sparsity dimension of the hard instance (default d)")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=None, help="trials or samples (per-experiment default)")
    p.add_argument("--seed", type=_seed, default=None, help=f"master seed (default ${SEED_ENV}, then 0)")
    p.add_argument("--solver", choices=SOLVERS, default="lanczos")
    p.add_argument("--grid", type=_grid, default=None, help="comma-separated query budgets or density abscissae")
    p.add_argument("--T", type=int, default=None, help="query count for posterior and decoupling")
    p.add_argument("--delta", type=float, default=0.3, help="good-event failure probability for calibration")
    p.add_argument("--c", type=float, default=1.0, help="success slack c in (1 - c gap) lambda_1")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--rounds-constant", type=float, default=1.0)
    p.add_argument("--boost", type=int, default=1, help="restart copies L for the reduction")
    p.add_argument("--budget-constant", type=float, default=1.0)
    p.add_argument("--slack", type=float, default=0.1)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_seed(value) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    return _seed(env) if env else 0


def config_from_args(args) -> ExperimentConfig:
    grid = args.grid
    if grid is not None and args.experiment != "density":
        if any(not float(t).is_integer() for t in grid):
            raise argparse.ArgumentTypeError("grid entries must be integers for this experiment")
        grid = tuple(int(t) for t in grid)
    return ExperimentConfig(
        experiment=args.experiment, d=args.d, s=args.s, beta=args.beta, trials=args.trials,
        seed=resolve_seed(args.seed), solver=args.solver, grid=grid, out=args.out, format=args.format,
        T=args.T, delta=args.delta, c=args.c, tau=args.tau, rounds_constant=args.rounds_constant,
        boost=args.boost, budget_constant=args.budget_constant, slack=args.slack, jobs=args.jobs,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        report = run_experiment(cfg)
        text = report.render(cfg.format)
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (QueryLabError, argparse.ArgumentTypeError, OSError) as exc:
        print(f"querylab: error: {exc}", file=sys.stderr)
        return 1
    log.info("summary: %s", report.summary)
    if report.passed is False:
        print(f"querylab: {cfg.experiment} failed its acceptance check", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
