"""Dataset ingestion, run-config parsing, and result-store persistence.

Numeric CSV output uses Python's shortest round-trip float encoding so a
written store can be reloaded bit-for-bit and reruns with the same seed are
byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DegenerateSplitError,
    EmptyDatasetError,
    NonFiniteValueError,
    ParseError,
)
from .linalg import Dataset
from .simulation import (
    RNG_ALGORITHM,
    ErrorProcess,
    GridResult,
    PredictorDesign,
    SimConfig,
    TrueProcess,
)

RUN_CONFIG_SCHEMA_VERSION = 1
STORE_SCHEMA_VERSION = 1

RESULTS_HEADER = [
    "config_id", "iteration", "k",
    "train_mse", "test_mse", "press_over_n", "proposed_mse",
]
PER_CASE_HEADER = [
    "config_id", "iteration", "k", "case_id",
    "oos_leverage", "projected_sq_error", "actual_sq_error",
]
TRAIN_LEVERAGE_HEADER = ["config_id", "iteration", "k", "case_id", "leverage"]


def fmt(x: float) -> str:
    """Shortest decimal string that parses back to the same float."""
    return repr(float(x))


# ---------------------------------------------------------------------------
# Delimited dataset files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetSpec:
    path: str
    outcome_column: str
    predictor_columns: tuple[str, ...] | None = None  # None means all others
    add_intercept: bool = True
    delimiter: str = ","


def load_dataset(spec: DatasetSpec, require_outcome: bool = True) -> Dataset:
    """Read a header-ed delimited file into a Dataset.

    With require_outcome=False and the outcome column absent from the
    header, the outcome vector is filled with zeros (deployment-time test
    sets whose true outcomes are unknown).
    """
    path = Path(spec.path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    with path.open(newline="") as fh:
        reader = csv.reader(fh, delimiter=spec.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDatasetError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        has_outcome = spec.outcome_column in header
        if require_outcome and not has_outcome:
            raise ParseError(
                f"{path}: outcome column {spec.outcome_column!r} not in header",
                column=spec.outcome_column,
            )
        if spec.predictor_columns is None:
            predictors = [h for h in header if h != spec.outcome_column]
        else:
            predictors = list(spec.predictor_columns)
            missing = [c for c in predictors if c not in header]
            if missing:
                raise ParseError(
                    f"{path}: predictor columns not in header: {missing}",
                    column=missing[0],
                )
            if spec.outcome_column in predictors:
                raise ConfigError(
                    f"outcome column {spec.outcome_column!r} listed as predictor"
                )
        if not predictors:
            raise EmptyDatasetError(f"{path}: no predictor columns")
        col_index = {name: header.index(name) for name in predictors}
        y_index = header.index(spec.outcome_column) if has_outcome else None

        rows, y = [], []
        for row_num, row in enumerate(reader, start=2):
            if not row or all(c.strip() == "" for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: row {row_num} has {len(row)} fields, header has {len(header)}",
                    row=row_num,
                )
            values = []
            for name in predictors:
                cell = row[col_index[name]].strip()
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {row_num}, column {name!r}: cannot parse {cell!r}",
                        row=row_num,
                        column=name,
                    ) from None
            if y_index is not None:
                cell = row[y_index].strip()
                try:
                    y.append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {row_num}, column {spec.outcome_column!r}: "
                        f"cannot parse {cell!r}",
                        row=row_num,
                        column=spec.outcome_column,
                    ) from None
            rows.append(values)

    if not rows:
        raise EmptyDatasetError(f"{path}: no data rows")
    X = np.asarray(rows, dtype=np.float64)
    Y = np.asarray(y if y_index is not None else np.zeros(len(rows)))
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise NonFiniteValueError(f"{path}: non-finite value in data")
    data = Dataset(X, Y, tuple(predictors))
    if spec.add_intercept:
        data = data.with_intercept()
    return data


def write_dataset(path: str | Path, data: Dataset) -> None:
    """Write a Dataset back to CSV at full round-trip precision."""
    names = data.column_names or tuple(f"x{i}" for i in range(data.k))
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", *names])
        for i in range(data.n):
            writer.writerow([fmt(data.Y[i]), *(fmt(v) for v in data.X[i])])


def split_train_test(
    data: Dataset, train_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Per-row Bernoulli split, so realized sizes vary across seeds."""
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError("train_fraction must be in (0, 1)")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    mask = rng.random(data.n) < train_fraction
    if mask.sum() < 2 or (~mask).sum() < 1:
        raise DegenerateSplitError(
            f"split left {int(mask.sum())} training and {int((~mask).sum())} test rows"
        )
    return data.take_rows(mask), data.take_rows(~mask)


# ---------------------------------------------------------------------------
# Run-config documents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagnoseJob:
    train: DatasetSpec
    test: DatasetSpec | None
    split_fraction: float | None
    k_max: int
    seed: int = 0


_SIM_KEYS = {
    "config_id", "n_true_predictors", "error_process", "predictor_design",
    "n_train", "m_test", "k_sweep", "iterations", "base_seed",
    "per_case_sample", "residual_sd_scale", "predictor_sds",
}
_DATASET_KEYS = {"path", "outcome_column", "predictor_columns", "add_intercept", "delimiter"}
_DIAGNOSE_KEYS = {"train", "test", "split_fraction", "k_max", "seed"}


def _reject_unknown(doc: dict, allowed: set[str], where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def _parse_k_sweep(value) -> tuple[int, ...]:
    if isinstance(value, dict):
        _reject_unknown(value, {"start", "stop", "step"}, "k_sweep")
        return tuple(range(int(value["start"]), int(value["stop"]) + 1,
                           int(value.get("step", 1))))
    if isinstance(value, list):
        return tuple(int(k) for k in value)
    raise ConfigError("k_sweep must be a list or {start, stop[, step]}")


def parse_sim_config(doc: dict) -> SimConfig:
    _reject_unknown(doc, _SIM_KEYS, f"config {doc.get('config_id', '?')!r}")
    try:
        process = TrueProcess(
            n_true_predictors=int(doc.get("n_true_predictors", 45)),
            residual_sd_scale=float(doc.get("residual_sd_scale", 150.0)),
            error_process=ErrorProcess(doc.get("error_process", "homoskedastic")),
            predictor_sds=(
                tuple(doc["predictor_sds"]) if "predictor_sds" in doc else None
            ),
        )
        return SimConfig(
            config_id=str(doc["config_id"]),
            process=process,
            n_train=int(doc["n_train"]),
            m_test=int(doc["m_test"]),
            predictor_design=PredictorDesign(doc.get("predictor_design", "stochastic")),
            k_sweep=_parse_k_sweep(doc["k_sweep"]),
            iterations=int(doc["iterations"]),
            base_seed=int(doc["base_seed"]),
            per_case_sample=int(doc.get("per_case_sample", 200)),
        )
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _parse_dataset_spec(doc: dict, where: str) -> DatasetSpec:
    _reject_unknown(doc, _DATASET_KEYS, where)
    try:
        return DatasetSpec(
            path=str(doc["path"]),
            outcome_column=str(doc["outcome_column"]),
            predictor_columns=(
                tuple(doc["predictor_columns"])
                if doc.get("predictor_columns") is not None
                else None
            ),
            add_intercept=bool(doc.get("add_intercept", True)),
            delimiter=str(doc.get("delimiter", ",")),
        )
    except KeyError as exc:
        raise ConfigError(f"{where}: missing required key {exc.args[0]!r}") from None


def load_run_config(path: str | Path) -> list[SimConfig] | DiagnoseJob:
    """Parse and validate a JSON run-config document.

    Returns a list of SimConfig for kind "simulate" or a DiagnoseJob for
    kind "diagnose". Unknown keys are rejected everywhere.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    version = doc.get("schema_version")
    if version != RUN_CONFIG_SCHEMA_VERSION:
        raise ConfigError(
            f"{path}: schema_version must be {RUN_CONFIG_SCHEMA_VERSION}, got {version!r}"
        )
    kind = doc.get("kind")
    if kind == "simulate":
        _reject_unknown(doc, {"schema_version", "kind", "configs"}, "document")
        configs = doc.get("configs")
        if not isinstance(configs, list) or not configs:
            raise ConfigError(f"{path}: 'configs' must be a non-empty list")
        parsed = [parse_sim_config(c) for c in configs]
        ids = [c.config_id for c in parsed]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"{path}: duplicate config_id")
        return parsed
    if kind == "diagnose":
        _reject_unknown(doc, {"schema_version", "kind"} | _DIAGNOSE_KEYS, "document")
        test = doc.get("test")
        split = doc.get("split_fraction")
        if (test is None) == (split is None):
            raise ConfigError(f"{path}: give exactly one of 'test' or 'split_fraction'")
        return DiagnoseJob(
            train=_parse_dataset_spec(doc["train"], "train"),
            test=_parse_dataset_spec(test, "test") if test is not None else None,
            split_fraction=float(split) if split is not None else None,
            k_max=int(doc["k_max"]),
            seed=int(doc.get("seed", 0)),
        )
    raise ConfigError(f"{path}: kind must be 'simulate' or 'diagnose', got {kind!r}")


# ---------------------------------------------------------------------------
# Result store
# ---------------------------------------------------------------------------

def _config_manifest_entry(cfg: SimConfig) -> dict:
    entry = {
        "config_id": cfg.config_id,
        "n_true_predictors": cfg.process.n_true_predictors,
        "residual_sd_scale": cfg.process.residual_sd_scale,
        "error_process": cfg.process.error_process.value,
        "predictor_design": cfg.predictor_design.value,
        "n_train": cfg.n_train,
        "m_test": cfg.m_test,
        "k_sweep": list(cfg.k_sweep),
        "iterations": cfg.iterations,
        "base_seed": cfg.base_seed,
        "per_case_sample": cfg.per_case_sample,
    }
    digest = hashlib.sha256(
        json.dumps(entry, sort_keys=True).encode()
    ).hexdigest()
    entry["config_hash"] = digest
    return entry


def write_store(
    out_dir: str | Path, cfgs: list[SimConfig], grid: GridResult
) -> Path:
    """Persist a grid run: one results and one per-case CSV per config,
    plus a manifest recording schema version, seeds, and the RNG algorithm."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    from . import __version__

    for cfg in cfgs:
        rows = grid.results[cfg.config_id]
        with (out / f"results_{cfg.config_id}.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(RESULTS_HEADER)
            for r in rows:
                writer.writerow([
                    cfg.config_id, r.iteration, r.k,
                    fmt(r.train_mse), fmt(r.test_mse),
                    fmt(r.press_over_n), fmt(r.proposed_mse),
                ])
        with (out / f"per_case_{cfg.config_id}.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(PER_CASE_HEADER)
            for r in rows:
                for c in r.per_case:
                    writer.writerow([
                        cfg.config_id, r.iteration, r.k, c.case_id,
                        fmt(c.oos_leverage), fmt(c.projected_sq_error),
                        fmt(c.actual_sq_error),
                    ])
        with (out / f"train_leverage_{cfg.config_id}.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRAIN_LEVERAGE_HEADER)
            for r in rows:
                for case_id, h in enumerate(r.train_leverage):
                    writer.writerow([cfg.config_id, r.iteration, r.k, case_id, fmt(h)])

    manifest = {
        "schema_version": STORE_SCHEMA_VERSION,
        "rng_algorithm": RNG_ALGORITHM,
        "library_version": __version__,
        "configs": [_config_manifest_entry(c) for c in cfgs],
        "failures": [
            {"config_id": cid, "iteration": it, "error": err}
            for cid, it, err in grid.failures
        ],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return out


def read_manifest(store_dir: str | Path) -> dict:
    path = Path(store_dir) / "manifest.json"
    if not path.exists():
        raise FileNotFoundError(str(path))
    return json.loads(path.read_text())
