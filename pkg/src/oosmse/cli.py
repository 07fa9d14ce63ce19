"""Command-line harness.

Subcommands: ``simulate`` runs a Monte Carlo grid from a JSON config and
writes a result store; ``diagnose`` computes PRESS/n, projected MSE, and
per-case projections for a user-supplied CSV dataset; ``aggregate`` folds a
store into the report CSVs; ``oracle-check`` compares the closed-form PRESS
against brute-force leave-one-out refits on random data.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import aggregate as agg
from . import data_io, diagnostics, oracle
from .errors import (
    ConfigError,
    DegenerateSplitError,
    EmptyStoreError,
    SchemaMismatchError,
)
from .linalg import Dataset, fit_ols
from .simulation import run_grid

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_PARTIAL_FAILURE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oosmse",
        description="Out-of-sample prediction-error projections for linear regression",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo grid from a config file")
    sim.add_argument("config", help="JSON run-config file (kind: simulate)")
    sim.add_argument("--seed", type=int, default=None,
                     help="override base_seed for every config")
    sim.add_argument("--threads", type=int, default=1)
    sim.add_argument("--out-dir", default="store")

    diag = sub.add_parser("diagnose", help="error projections for a CSV dataset")
    diag.add_argument("--train", required=True, help="training CSV path")
    group = diag.add_mutually_exclusive_group(required=True)
    group.add_argument("--test", help="test CSV path (outcome column optional)")
    group.add_argument("--split", type=float,
                       help="per-row probability of assignment to training")
    diag.add_argument("--outcome", required=True, help="outcome column name")
    diag.add_argument("--predictors", default=None,
                      help="comma-separated predictor columns, in model order "
                           "(default: all non-outcome columns in header order)")
    diag.add_argument("--k-max", type=int, required=True)
    diag.add_argument("--no-intercept", action="store_true")
    diag.add_argument("--delimiter", default=",")
    diag.add_argument("--seed", type=int, default=0)
    diag.add_argument("--threads", type=int, default=1)
    diag.add_argument("--out-dir", default="diagnose")

    ag = sub.add_parser("aggregate", help="fold a result store into report CSVs")
    ag.add_argument("store_dir")
    ag.add_argument("--bin-width", type=float, default=0.1)
    ag.add_argument("--seed", type=int, default=0)
    ag.add_argument("--threads", type=int, default=1)
    ag.add_argument("--out-dir", default=None, help="default: STORE_DIR/reports")

    oc = sub.add_parser("oracle-check",
                        help="compare fast PRESS against brute-force refits")
    oc.add_argument("--trials", type=int, default=50)
    oc.add_argument("--seed", type=int, default=0)
    oc.add_argument("--threads", type=int, default=1)
    oc.add_argument("--out-dir", default=None)
    return parser


def _cmd_simulate(args) -> int:
    configs = data_io.load_run_config(args.config)
    if not isinstance(configs, list):
        raise ConfigError(f"{args.config}: expected kind 'simulate'")
    if args.seed is not None:
        configs = [dataclasses.replace(c, base_seed=args.seed) for c in configs]
    grid = run_grid(configs, threads=args.threads)
    out = data_io.write_store(args.out_dir, configs, grid)
    total = sum(len(rows) for rows in grid.results.values())
    print(f"wrote {total} result rows for {len(configs)} config(s) to {out}")
    if grid.failures:
        for cid, it, err in grid.failures:
            print(f"FAILED cell {cid}/{it}: {err}", file=sys.stderr)
        return EXIT_PARTIAL_FAILURE
    return EXIT_OK


def _model_columns(data: Dataset, k: int) -> np.ndarray:
    # Column 0 is the intercept when present; models take the first k predictors.
    has_intercept = data.column_names is not None and data.column_names[0] == "intercept"
    stop = k + 1 if has_intercept else k
    return data.X[:, :stop]


def _cmd_diagnose(args) -> int:
    predictors = (
        tuple(p.strip() for p in args.predictors.split(",") if p.strip())
        if args.predictors
        else None
    )
    train_spec = data_io.DatasetSpec(
        path=args.train,
        outcome_column=args.outcome,
        predictor_columns=predictors,
        add_intercept=not args.no_intercept,
        delimiter=args.delimiter,
    )
    train = data_io.load_dataset(train_spec)
    has_test_outcome = True
    if args.test is not None:
        test_spec = dataclasses.replace(train_spec, path=args.test)
        test = data_io.load_dataset(test_spec, require_outcome=False)
        with Path(args.test).open(newline="") as fh:
            header = next(csv.reader(fh, delimiter=args.delimiter))
        has_test_outcome = args.outcome in [h.strip() for h in header]
        if train.k != test.k:
            raise ConfigError("train and test have different predictor sets")
    else:
        train, test = data_io.split_train_test(train, args.split, args.seed)

    n_predictors = train.k - (0 if args.no_intercept else 1)
    if args.k_max < 1 or args.k_max > n_predictors:
        raise ConfigError(f"--k-max must be in 1..{n_predictors}")
    if args.k_max > train.n - 2:
        raise DegenerateSplitError(
            f"training sample of {train.n} too small for k up to {args.k_max}"
        )

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fmt = data_io.fmt
    with (out / "diagnose_curves.csv").open("w", newline="") as curves_fh, \
         (out / "diagnose_cases.csv").open("w", newline="") as cases_fh:
        curves = csv.writer(curves_fh)
        cases = csv.writer(cases_fh)
        curves.writerow([
            "k", "model_k", "status", "train_mse", "press_over_n",
            "proposed_mse", "negative_projection_count", "test_mse",
        ])
        cases.writerow([
            "k", "case_id", "oos_leverage", "projected_sq_error", "actual_sq_error",
        ])
        any_failed = False
        for k in range(1, args.k_max + 1):
            Xk = _model_columns(train, k)
            Xt = _model_columns(test, k)
            try:
                fit = fit_ols(Dataset(Xk, train.Y))
                proj = diagnostics.project_oos(fit, Xt)
            except ValueError as exc:  # RankDeficientError etc.; other k still run
                curves.writerow([k, Xk.shape[1], f"error: {exc}",
                                 "", "", "", "", ""])
                any_failed = True
                continue
            test_mse = (
                fmt(diagnostics.actual_test_mse(fit, Xt, test.Y))
                if has_test_outcome else ""
            )
            curves.writerow([
                k, fit.model_k, "ok",
                fmt(np.mean(fit.residuals**2)),
                fmt(diagnostics.press(fit) / train.n),
                fmt(proj.projected_mse),
                proj.negative_projection_count,
                test_mse,
            ])
            sq_err = (
                (test.Y - diagnostics.predict(fit, Xt)) ** 2
                if has_test_outcome else None
            )
            for j in range(Xt.shape[0]):
                cases.writerow([
                    k, j,
                    fmt(proj.oos_leverage[j]),
                    fmt(proj.per_case_projected_sq_error[j]),
                    fmt(sq_err[j]) if sq_err is not None else "",
                ])
    print(f"wrote diagnose reports to {out}")
    return EXIT_PARTIAL_FAILURE if any_failed else EXIT_OK


def _cmd_aggregate(args) -> int:
    out_dir = args.out_dir or str(Path(args.store_dir) / "reports")
    paths = agg.write_reports(args.store_dir, out_dir, bin_width=args.bin_width)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    worst = 0.0
    for _ in range(args.trials):
        n = int(rng.integers(12, 50))
        k = int(rng.integers(1, 8))
        X = np.column_stack([np.ones(n), rng.standard_normal((n, k))])
        Y = rng.standard_normal(n)
        data = Dataset(X, Y)
        fast = diagnostics.press(fit_ols(data))
        slow = oracle.press_bruteforce(data)
        worst = max(worst, abs(fast - slow) / slow)
    print(f"max relative PRESS disagreement over {args.trials} trials: {worst:.3e}")
    if worst >= 1e-8:
        print("FAIL: fast and brute-force PRESS disagree", file=sys.stderr)
        return 1
    print("ok")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "diagnose": _cmd_diagnose,
        "aggregate": _cmd_aggregate,
        "oracle-check": _cmd_oracle_check,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, SchemaMismatchError, EmptyStoreError,
            DegenerateSplitError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
