"""Command-line interface.

Subcommands
-----------
estimate
    Run the global estimator on samples from a file (one number per line,
    ``#`` comments allowed) or on synthetic draws from a named distribution.
benchmark
    Repeated-trial comparison of estimators on a distribution; writes the
    per-trial errors and the quantile summary.
fisher-sweep
    Oracle smoothed Fisher information over a bandwidth grid.
score-diagnostic
    Normalized L2 distance between the fitted clipped score and the oracle
    smoothed score, averaged over seeds.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .distributions import parse_spec, sample, spec_id
from .errors import ConfigError, InvalidConfig, NumericalError
from .estimators import EstimatorConfig, global_estimate
from .harness import (
    ESTIMATOR_NAMES,
    ExperimentConfig,
    fisher_sweep,
    run_trials,
    score_l2_diagnostic,
)
from .rng import RngStream

__all__ = ["main"]


def read_sample_file(path: str) -> np.ndarray:
    """One float per line; blank lines and '#...' comments are skipped."""
    values = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                text = line.split("#", 1)[0].strip()
                if not text:
                    continue
                try:
                    values.append(float(text))
                except ValueError:
                    raise InvalidConfig(
                        f"{path}:{lineno}: not a number: {text!r}"
                    ) from None
    except OSError as exc:
        raise InvalidConfig(f"cannot read sample file {path}: {exc}") from None
    if not values:
        raise InvalidConfig(f"sample file {path} contains no numbers")
    return np.asarray(values, dtype=float)


def parse_r_grid(text: str) -> np.ndarray:
    """Parse 'a:b:logN' / 'a:b:linN' ranges or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidConfig(f"r-grid range must be 'a:b:logN' or 'a:b:linN', got {text!r}")
        try:
            lo = float(parts[0])
            hi = float(parts[1])
        except ValueError:
            raise InvalidConfig(f"bad r-grid endpoints in {text!r}") from None
        kind = parts[2][:3]
        try:
            count = int(parts[2][3:])
        except ValueError:
            raise InvalidConfig(f"bad r-grid count in {text!r}") from None
        if count < 1:
            raise InvalidConfig("r-grid needs at least one point")
        if not (0 < lo <= hi):
            raise InvalidConfig("r-grid endpoints must satisfy 0 < a <= b")
        if kind == "log":
            return np.geomspace(lo, hi, count)
        if kind == "lin":
            return np.linspace(lo, hi, count)
        raise InvalidConfig(f"r-grid scale must be 'log' or 'lin', got {parts[2]!r}")
    try:
        grid = np.asarray([float(tok) for tok in text.split(",") if tok.strip()], dtype=float)
    except ValueError:
        raise InvalidConfig(f"bad r-grid list {text!r}") from None
    if grid.size == 0 or not np.all(grid > 0):
        raise InvalidConfig("r-grid values must be positive")
    return grid


def _spec_from_text(text: str):
    try:
        return parse_spec(text)
    except ValueError as exc:
        raise InvalidConfig(str(exc)) from None


def _parse_seeds(text: str) -> list:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InvalidConfig(f"seeds must be comma-separated integers, got {text!r}") from None


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _cmd_estimate(args) -> int:
    if args.infile:
        samples = read_sample_file(args.infile)
    elif args.spec and args.n:
        spec = _spec_from_text(args.spec)
        stream = RngStream(args.seed, ("cli", "estimate", "draw"))
        samples = sample(spec, stream, args.n)
    else:
        raise InvalidConfig("estimate needs --in FILE, or --spec and --n for synthetic data")
    cfg = EstimatorConfig(delta=args.delta, r=args.r, xi=args.xi, seed=args.seed)
    result = global_estimate(samples, cfg)
    payload = result.to_dict()
    if args.format == "csv":
        flat = {
            "mu_hat": result.mu_hat,
            "mu_1": result.mu_1,
            "eps_hat": result.eps_hat,
            "r": result.params.r,
            "xi": result.params.xi,
            "eta": result.params.eta,
            "threshold": result.threshold,
            "fisher": result.fisher.value,
            "n1": result.n1,
            "n2": result.n2,
            "n3": result.n3,
        }
        text = _csv_text(["field", "value"], [(k, v) for k, v in flat.items()])
    else:
        text = json.dumps(payload, indent=2) + "\n"
    _emit(text, args.out)
    return 0


def _cmd_benchmark(args) -> int:
    estimators = tuple(tok.strip() for tok in args.estimators.split(",") if tok.strip())
    cfg = ExperimentConfig(
        spec=_spec_from_text(args.spec),
        n=args.n,
        delta=args.delta,
        trials=args.trials,
        seed=args.seed,
        estimators=estimators,
        r=args.r,
        xi=args.xi,
    )
    report = run_trials(cfg)
    if args.format == "json":
        _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
        return 0
    # CSV: per-trial table plus quantile summary
    trial_rows = [
        (name, i, err)
        for name in cfg.estimators
        for i, err in enumerate(report.errors[name])
    ]
    trials_text = _csv_text(["estimator", "trial", "abs_error"], trial_rows)
    summary_rows = [
        (
            name,
            report.quantiles[name]["q50"],
            report.quantiles[name]["q90"],
            report.quantiles[name]["q_1_minus_delta"],
            report.quantiles[name]["q99"],
            report.oracle_fisher,
            report.bound,
            report.bound_ratio[name],
        )
        for name in cfg.estimators
    ]
    summary_text = _csv_text(
        ["estimator", "q50", "q90", "q_1_minus_delta", "q99", "oracle_I_r", "bound", "bound_ratio"],
        summary_rows,
    )
    if args.out:
        _emit(trials_text, args.out + "_trials.csv")
        _emit(summary_text, args.out + "_summary.csv")
    else:
        sys.stdout.write(trials_text)
        sys.stdout.write(summary_text)
    return 0


def _cmd_fisher_sweep(args) -> int:
    grid = parse_r_grid(args.r_grid)
    rows = fisher_sweep(_spec_from_text(args.spec), grid)
    if args.format == "json":
        _emit(json.dumps(rows, indent=2) + "\n", args.out)
        return 0
    text = _csv_text(
        ["spec_id", "r", "fisher", "tail_bound", "error"],
        [(r["spec_id"], r["r"], r["fisher"], r["tail_bound"], r["error"] or "") for r in rows],
    )
    _emit(text, args.out)
    return 0


def _cmd_score_diagnostic(args) -> int:
    seeds = _parse_seeds(args.seeds)
    spec = _spec_from_text(args.spec)
    value = score_l2_diagnostic(spec, args.r, args.n, args.delta, seeds)
    if args.format == "csv":
        text = _csv_text(
            ["spec_id", "r", "n", "delta", "seeds", "value"],
            [(spec_id(spec), args.r, args.n, args.delta, ";".join(map(str, seeds)), value)],
        )
    else:
        text = (
            json.dumps(
                {
                    "spec_id": spec_id(spec),
                    "r": args.r,
                    "n": args.n,
                    "delta": args.delta,
                    "seeds": seeds,
                    "value": value,
                },
                indent=2,
            )
            + "\n"
        )
    _emit(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fisher-mean",
        description="Finite-sample mean estimation for symmetric distributions via smoothed scores.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="run the global estimator on a sample file")
    p_est.add_argument("--in", dest="infile", help="sample file, one number per line")
    p_est.add_argument("--spec", help="distribution for synthetic input (with --n)")
    p_est.add_argument("--n", type=int, help="synthetic sample count (with --spec)")
    p_est.add_argument("--delta", type=float, default=0.05, help="failure budget (default 0.05)")
    p_est.add_argument("--r", type=float, default=None, help="bandwidth override")
    p_est.add_argument("--xi", type=float, default=None, help="split-count override (> 3)")
    p_est.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p_est.add_argument("--format", choices=("json", "csv"), default="json")
    p_est.add_argument("--out", default=None, help="output path (default stdout)")
    p_est.set_defaults(func=_cmd_estimate)

    p_bench = sub.add_parser("benchmark", help="repeated-trial estimator comparison")
    p_bench.add_argument("--spec", required=True, help="distribution, e.g. gaussian:0,1")
    p_bench.add_argument("--n", type=int, required=True, help="samples per trial")
    p_bench.add_argument("--delta", type=float, default=0.05)
    p_bench.add_argument("--trials", type=int, default=100)
    p_bench.add_argument(
        "--estimators",
        default="global,empirical_mean",
        help=f"comma-separated subset of {', '.join(ESTIMATOR_NAMES)}",
    )
    p_bench.add_argument("--r", type=float, default=None)
    p_bench.add_argument("--xi", type=float, default=None)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--format", choices=("csv", "json"), default="csv")
    p_bench.add_argument(
        "--out",
        default=None,
        help="output prefix for CSV (writes PREFIX_trials.csv and PREFIX_summary.csv) or path for JSON",
    )
    p_bench.set_defaults(func=_cmd_benchmark)

    p_sweep = sub.add_parser("fisher-sweep", help="oracle Fisher information across bandwidths")
    p_sweep.add_argument("--spec", required=True)
    p_sweep.add_argument(
        "--r-grid",
        required=True,
        help="'a:b:logN', 'a:b:linN', or comma-separated values, e.g. 0.005:0.5:log25",
    )
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=_cmd_fisher_sweep)

    p_diag = sub.add_parser(
        "score-diagnostic", help="L2 defect of the fitted clipped score vs the oracle"
    )
    p_diag.add_argument("--spec", required=True)
    p_diag.add_argument("--r", type=float, required=True)
    p_diag.add_argument("--n", type=int, required=True, help="KDE sample count per seed")
    p_diag.add_argument("--delta", type=float, default=0.05)
    p_diag.add_argument("--seeds", required=True, help="comma-separated seeds, e.g. 0,1,2")
    p_diag.add_argument("--format", choices=("json", "csv"), default="json")
    p_diag.add_argument("--out", default=None)
    p_diag.set_defaults(func=_cmd_score_diagnostic)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"run 'fisher-mean {args.command} --help' for usage", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
