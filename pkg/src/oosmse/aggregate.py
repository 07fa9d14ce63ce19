"""Aggregate reports over a simulation result store.

Everything here is a pure fold over the store rows: shuffling rows changes
nothing. Reports are emitted as CSV; no figures are rendered.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pandas as pd

from .data_io import PER_CASE_HEADER, RESULTS_HEADER, TRAIN_LEVERAGE_HEADER, read_manifest
from .errors import EmptyStoreError, SchemaMismatchError

# MAPE cells with actual MSE below this are excluded (and counted) rather
# than allowed to blow up the ratio.
MAPE_ACTUAL_FLOOR = 1e-12

METRICS = ["train_mse", "test_mse", "press_over_n", "proposed_mse"]


def _read_csv(path: Path, expected_columns: list[str]) -> pd.DataFrame:
    if not path.exists():
        raise FileNotFoundError(str(path))
    df = pd.read_csv(path)
    if list(df.columns) != expected_columns:
        raise SchemaMismatchError(
            f"{path}: expected columns {expected_columns}, found {list(df.columns)}"
        )
    return df


def load_store(store_dir: str | Path):
    """Read manifest plus the results, per-case, and train-leverage tables."""
    store = Path(store_dir)
    manifest = read_manifest(store)
    results, per_case, train_lev = [], [], []
    for entry in manifest["configs"]:
        cid = entry["config_id"]
        results.append(_read_csv(store / f"results_{cid}.csv", RESULTS_HEADER))
        per_case.append(_read_csv(store / f"per_case_{cid}.csv", PER_CASE_HEADER))
        train_lev.append(
            _read_csv(store / f"train_leverage_{cid}.csv", TRAIN_LEVERAGE_HEADER)
        )
    results = pd.concat(results, ignore_index=True) if results else pd.DataFrame()
    per_case = pd.concat(per_case, ignore_index=True) if per_case else pd.DataFrame()
    train_lev = pd.concat(train_lev, ignore_index=True) if train_lev else pd.DataFrame()
    if results.empty:
        raise EmptyStoreError(f"{store}: no result rows")
    return manifest, results, per_case, train_lev


def _mean_count_se(grouped, column: str) -> pd.DataFrame:
    agg = grouped[column].agg(["mean", "count", "std"])
    agg["se"] = agg["std"] / np.sqrt(agg["count"].clip(lower=1))
    return agg


def curves(results: pd.DataFrame) -> pd.DataFrame:
    """Per-(config, k) means of the four error measures with MC standard errors."""
    rows = []
    for (cid, k), group in results.groupby(["config_id", "k"], sort=True):
        row = {"config_id": cid, "k": int(k), "n_iterations": len(group)}
        for metric in METRICS:
            values = group[metric]
            row[f"mean_{metric}"] = values.mean()
            row[f"se_{metric}"] = values.std(ddof=1) / math.sqrt(max(len(values), 1))
        rows.append(row)
    return pd.DataFrame(rows)


def mape(results: pd.DataFrame, manifest: dict) -> pd.DataFrame:
    """Mean absolute percentage error of each estimator against realized test MSE."""
    n_train = {c["config_id"]: c["n_train"] for c in manifest["configs"]}
    rows = []
    for (cid, k), group in results.groupby(["config_id", "k"], sort=True):
        usable = group[group["test_mse"] >= MAPE_ACTUAL_FLOOR]
        excluded = len(group) - len(usable)
        for estimator, column in [("press_over_n", "press_over_n"),
                                  ("proposed", "proposed_mse")]:
            ape = (usable[column] - usable["test_mse"]).abs() / usable["test_mse"]
            rows.append({
                "config_id": cid,
                "n_train": n_train.get(cid),
                "k": int(k),
                "estimator": estimator,
                "mape": ape.mean() if len(ape) else np.nan,
                "se_mape": ape.std(ddof=1) / math.sqrt(len(ape)) if len(ape) > 1 else np.nan,
                "n_used": len(usable),
                "n_excluded": excluded,
            })
    return pd.DataFrame(rows)


def _bin_edges(bin_width: float) -> np.ndarray:
    inner = np.arange(0.0, 1.0 + 1e-12, bin_width)
    return np.append(inner, np.inf)


def _bin_frame(values: pd.Series, bin_width: float) -> pd.Series:
    edges = _bin_edges(bin_width)
    return pd.cut(values, bins=edges, right=False, include_lowest=True)


def leverage_density(
    per_case: pd.DataFrame, train_lev: pd.DataFrame, bin_width: float = 0.1
) -> pd.DataFrame:
    """Binned leverage counts for training and test samples, by model size."""
    frames = []
    for sample, df, column in [
        ("train", train_lev, "leverage"),
        ("test", per_case, "oos_leverage"),
    ]:
        if df.empty:
            continue
        work = df[["config_id", "k", column]].copy()
        work["bin"] = _bin_frame(work[column], bin_width)
        counts = (
            work.groupby(["config_id", "k", "bin"], observed=False)
            .size()
            .reset_index(name="count")
        )
        counts["sample"] = sample
        frames.append(counts)
    if not frames:
        return pd.DataFrame(
            columns=["config_id", "sample", "k", "bin_left", "bin_right", "count"]
        )
    out = pd.concat(frames, ignore_index=True)
    out["bin_left"] = out["bin"].map(lambda b: b.left).astype(float)
    out["bin_right"] = out["bin"].map(lambda b: b.right).astype(float)
    return out[["config_id", "sample", "k", "bin_left", "bin_right", "count"]].sort_values(
        ["config_id", "sample", "k", "bin_left"]
    ).reset_index(drop=True)


def leverage_bins(
    per_case: pd.DataFrame, results: pd.DataFrame, bin_width: float = 0.1
) -> pd.DataFrame:
    """Actual vs projected error by test-case leverage bin, final bin open above 1.

    PRESS/n is a per-(iteration, k) scalar; it is joined onto each test case
    of that cell so the flat line it implies can be compared bin by bin.
    """
    if per_case.empty:
        raise EmptyStoreError("no per-case rows to bin")
    merged = per_case.merge(
        results[["config_id", "iteration", "k", "press_over_n"]],
        on=["config_id", "iteration", "k"],
        how="left",
        validate="many_to_one",
    )
    merged["bin"] = _bin_frame(merged["oos_leverage"], bin_width)
    rows = []
    for (cid, interval), group in merged.groupby(["config_id", "bin"], observed=True):
        actual = group["actual_sq_error"]
        proposed = group["projected_sq_error"]
        press = group["press_over_n"]
        rows.append({
            "config_id": cid,
            "bin_left": float(interval.left),
            "bin_right": float(interval.right),
            "n_cases": len(group),
            "mean_actual": actual.mean(),
            "mean_proposed": proposed.mean(),
            "mean_press_over_n": press.mean(),
            "gap_proposed": abs(proposed.mean() - actual.mean()),
            "gap_press": abs(press.mean() - actual.mean()),
            "mae_proposed": (proposed - actual).abs().mean(),
            "mae_press": (press - actual).abs().mean(),
        })
    return pd.DataFrame(rows).sort_values(["config_id", "bin_left"]).reset_index(drop=True)


def summary(results: pd.DataFrame, per_case: pd.DataFrame, manifest: dict) -> pd.DataFrame:
    """Per-config overall means, leverage>1 shares and means, negative share."""
    n_train = {c["config_id"]: c["n_train"] for c in manifest["configs"]}
    rows = []
    for cid, group in results.groupby("config_id", sort=True):
        row = {"config_id": cid, "n_train": n_train.get(cid)}
        for metric in METRICS:
            row[f"mean_{metric}"] = group[metric].mean()
        cases = per_case[per_case["config_id"] == cid]
        if len(cases):
            high = cases[cases["oos_leverage"] > 1.0]
            row["n_sampled_cases"] = len(cases)
            row["pct_leverage_gt1"] = 100.0 * len(high) / len(cases)
            row["lev_gt1_mean_actual"] = high["actual_sq_error"].mean() if len(high) else np.nan
            row["lev_gt1_mean_proposed"] = (
                high["projected_sq_error"].mean() if len(high) else np.nan
            )
            row["negative_projection_share"] = (
                100.0 * (cases["projected_sq_error"] < 0).mean()
            )
            row["pc_mean_actual"] = cases["actual_sq_error"].mean()
            row["pc_mean_proposed"] = cases["projected_sq_error"].mean()
        else:
            row["n_sampled_cases"] = 0
        rows.append(row)
    return pd.DataFrame(rows)


def write_reports(
    store_dir: str | Path, out_dir: str | Path, bin_width: float = 0.1
) -> dict[str, Path]:
    """Compute every report over a store and write the CSVs."""
    manifest, results, per_case, train_lev = load_store(store_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = {
        "curves": curves(results),
        "mape": mape(results, manifest),
        "leverage_density": leverage_density(per_case, train_lev, bin_width),
        "leverage_bins": leverage_bins(per_case, results, bin_width),
        "summary": summary(results, per_case, manifest),
    }
    paths = {}
    for name, df in reports.items():
        path = out / f"{name}.csv"
        df.to_csv(path, index=False)
        paths[name] = path
    return paths
