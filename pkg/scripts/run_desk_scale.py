#!/usr/bin/env python3
"""Desk-scale replication of the baseline Monte Carlo grid.

Writes a run config, simulates the four baseline cells (homoskedastic
n=50/80/1000 plus heteroskedastic n=80), folds the store into reports, and
prints the headline numbers next to the reference values.

    python3 scripts/run_desk_scale.py --iterations 200 --threads 8
"""

import argparse
import json
import sys
from pathlib import Path

import pandas as pd

from oosmse.cli import main as cli_main

REFERENCE = {
    # config_id -> (train, test, PRESS/n, proposed) grand means
    "homo_n80": (0.414, 0.802, 0.804, 0.800),
    "homo_n1000": (0.547, 0.570, 0.570, 0.570),
}
REFERENCE_LEV_SHARE = {"homo_n50": 46.64, "homo_n80": 14.62}


def build_config(iterations: int) -> dict:
    def cell(config_id, error_process, n_train, base_seed):
        return {
            "config_id": config_id,
            "n_true_predictors": 45,
            "error_process": error_process,
            "predictor_design": "stochastic",
            "n_train": n_train,
            "m_test": 2000,
            "k_sweep": {"start": 1, "stop": 45},
            "iterations": iterations,
            "base_seed": base_seed,
            "per_case_sample": 100,
        }

    return {
        "schema_version": 1,
        "kind": "simulate",
        "configs": [
            cell("homo_n80", "homoskedastic", 80, 20260823),
            cell("homo_n1000", "homoskedastic", 1000, 20260824),
            cell("homo_n50", "homoskedastic", 50, 20260825),
            cell("hetero_n80", "heteroskedastic", 80, 20260826),
        ],
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iterations", type=int, default=200)
    parser.add_argument("--threads", type=int, default=8)
    parser.add_argument("--out-dir", default="desk_scale")
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config_path = out / "config.json"
    config_path.write_text(json.dumps(build_config(args.iterations), indent=2))

    store = out / "store"
    code = cli_main(["simulate", str(config_path), "--threads", str(args.threads),
                     "--out-dir", str(store)])
    if code != 0:
        return code
    code = cli_main(["aggregate", str(store), "--out-dir", str(out / "reports")])
    if code != 0:
        return code

    results = pd.concat(
        [pd.read_csv(store / f"results_{cid}.csv")
         for cid in ["homo_n80", "homo_n1000", "homo_n50", "hetero_n80"]],
        ignore_index=True,
    )
    print("\ngrand means over iterations and k = 1..45 (reference in brackets):")
    for cid, ref in REFERENCE.items():
        group = results[results["config_id"] == cid]
        means = [group[m].mean()
                 for m in ["train_mse", "test_mse", "press_over_n", "proposed_mse"]]
        cells = "  ".join(f"{m:.3f} [{r:.3f}]" for m, r in zip(means, ref))
        print(f"  {cid:<12} train/test/press/proposed: {cells}")

    summary = pd.read_csv(out / "reports" / "summary.csv").set_index("config_id")
    print("\nshare of sampled test cases with out-of-sample leverage > 1:")
    for cid, ref in REFERENCE_LEV_SHARE.items():
        print(f"  {cid:<12} {summary.loc[cid, 'pct_leverage_gt1']:.2f}% [{ref:.2f}%]")
    neg = summary.loc["hetero_n80", "negative_projection_share"]
    print(f"\nnegative per-case projections (hetero_n80): {neg:.2f}% [8.6%]")
    print(f"\nreports written to {out / 'reports'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
