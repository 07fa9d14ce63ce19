"""Synthetic data generation and the Monte Carlo configuration grid.

The true outcome is a linear combination of independent normal predictors
with descending standard deviations (p, p-1, ..., 1), all sharing one true
coefficient, zero intercept, and a residual whose standard deviation is a
fixed multiple of that coefficient; the coefficient is scaled so the
outcome has unit variance. Each grid cell fits one OLS model per entry of
the k sweep (intercept plus the k highest-variance predictors) and records
training MSE, realized test MSE, PRESS/n, and the projected MSE.

Every (config, iteration) cell owns a private counter-based RNG stream
derived only from (base_seed, iteration), so cells can run in parallel with
output identical to the sequential order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import diagnostics
from .errors import ConfigError
from .linalg import Dataset, fit_ols, predict

RNG_ALGORITHM = "philox4x64 (numpy.random.Philox)"


class ErrorProcess(str, Enum):
    HOMOSKEDASTIC = "homoskedastic"
    HETEROSKEDASTIC = "heteroskedastic"


class PredictorDesign(str, Enum):
    NON_STOCHASTIC = "non-stochastic"
    STOCHASTIC = "stochastic"


@dataclass(frozen=True)
class TrueProcess:
    """Data-generating process for one simulation configuration.

    ``predictor_sds`` defaults to n_true_predictors, ..., 2, 1. The residual
    standard deviation is residual_sd_scale times the common coefficient.
    """

    n_true_predictors: int = 45
    residual_sd_scale: float = 150.0
    error_process: ErrorProcess = ErrorProcess.HOMOSKEDASTIC
    predictor_sds: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n_true_predictors < 1:
            raise ConfigError("need at least one true predictor")
        if self.predictor_sds is not None:
            sds = tuple(float(s) for s in self.predictor_sds)
            if len(sds) != self.n_true_predictors or any(s <= 0 for s in sds):
                raise ConfigError("predictor_sds must be positive, one per predictor")
            object.__setattr__(self, "predictor_sds", sds)

    @property
    def sds(self) -> np.ndarray:
        if self.predictor_sds is not None:
            return np.asarray(self.predictor_sds)
        return np.arange(self.n_true_predictors, 0, -1, dtype=np.float64)


def beta_for_unit_variance(process: TrueProcess) -> float:
    """Common coefficient making Var(y) = 1.

    Var(y) = beta^2 * (sum sd_s^2) + (scale * beta)^2, so
    beta = 1 / sqrt(sum sd_s^2 + scale^2).
    """
    return float(1.0 / np.sqrt(np.sum(process.sds**2) + process.residual_sd_scale**2))


def draw_residuals(
    process: TrueProcess, sigma2: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Draw residuals with the given per-case conditional variances.

    Homoskedastic: plain scaled normals. Heteroskedastic: a product of two
    independent standard normals scaled to the conditional variance, which
    keeps E[eps^2 | x] = sigma2 but has heavier tails.
    """
    n = sigma2.shape[0]
    eps = rng.standard_normal(n)
    if process.error_process is ErrorProcess.HETEROSKEDASTIC:
        eps = eps * rng.standard_normal(n)
    return eps * np.sqrt(sigma2)


def conditional_variances(
    process: TrueProcess, X: np.ndarray
) -> np.ndarray:
    """Per-case residual variance sigma_i^2 implied by the process at X.

    Heteroskedastic variance rises with the magnitude of every predictor:
    sigma_i^2 = s^2 * c_i with c_i the mean squared standardized predictor
    value of row i (E[c_i] = 1, so the unconditional variance is s^2 in
    both regimes).
    """
    resid_var = (process.residual_sd_scale * beta_for_unit_variance(process)) ** 2
    if process.error_process is ErrorProcess.HETEROSKEDASTIC:
        return resid_var * np.mean((X / process.sds) ** 2, axis=1)
    return np.full(X.shape[0], resid_var)


def generate_sample(
    process: TrueProcess, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw (X, Y, sigma2_true) of size n from the process."""
    if n < 1:
        raise ConfigError("need n >= 1")
    sds = process.sds
    beta = beta_for_unit_variance(process)
    X = rng.standard_normal((n, sds.shape[0])) * sds
    sigma2 = conditional_variances(process, X)
    eps = draw_residuals(process, sigma2, rng)
    Y = X.sum(axis=1) * beta + eps
    return X, Y, sigma2


@dataclass(frozen=True)
class SimConfig:
    """One cell of the simulation grid."""

    config_id: str
    process: TrueProcess
    n_train: int
    m_test: int
    predictor_design: PredictorDesign
    k_sweep: tuple[int, ...]
    iterations: int
    base_seed: int
    per_case_sample: int = 200

    def __post_init__(self):
        object.__setattr__(self, "k_sweep", tuple(int(k) for k in self.k_sweep))
        for k in self.k_sweep:
            if k < 1 or k > self.process.n_true_predictors:
                raise ConfigError(
                    f"k={k} outside 1..{self.process.n_true_predictors}"
                )
            if k > self.n_train - 2:
                raise ConfigError(
                    f"k={k} exceeds n_train - 2 = {self.n_train - 2}"
                )
        if self.iterations < 0 or self.n_train < 3 or self.m_test < 1:
            raise ConfigError("invalid sample sizes or iteration count")
        if self.per_case_sample < 0:
            raise ConfigError("per_case_sample must be nonnegative")


@dataclass(frozen=True)
class PerCaseRecord:
    case_id: int
    oos_leverage: float
    projected_sq_error: float
    actual_sq_error: float


@dataclass(frozen=True)
class IterationResult:
    """Measured and projected errors for one (iteration, model size) cell."""

    iteration: int
    k: int
    train_mse: float
    test_mse: float
    press_over_n: float
    proposed_mse: float
    per_case: tuple[PerCaseRecord, ...] = ()
    train_leverage: tuple[float, ...] = field(default=(), repr=False)


def iteration_rng(base_seed: int, iteration: int) -> np.random.Generator:
    """Counter-based stream depending only on (base_seed, iteration)."""
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(iteration,))
    return np.random.Generator(np.random.Philox(ss))


def _with_intercept(X: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(X.shape[0]), X])


def run_iteration(cfg: SimConfig, iteration: int) -> list[IterationResult]:
    """Draw one training/test pair and fit every model size in the sweep.

    Model k uses an intercept plus the k highest-variance true predictors
    (the leading columns, since predictor SDs descend). All random draws
    happen before the sweep so results do not depend on the sweep order.
    """
    rng = iteration_rng(cfg.base_seed, iteration)
    process = cfg.process
    beta = beta_for_unit_variance(process)
    X, Y, sigma2 = generate_sample(process, cfg.n_train, rng)
    if cfg.predictor_design is PredictorDesign.NON_STOCHASTIC:
        # Same design, fresh residuals; identical x rows share sigma_i^2.
        X_test = X
        Y_test = X.sum(axis=1) * beta + draw_residuals(process, sigma2, rng)
    else:
        X_test, Y_test, _ = generate_sample(process, cfg.m_test, rng)

    results = []
    sample = min(cfg.per_case_sample, X_test.shape[0])
    for k in cfg.k_sweep:
        data = Dataset(_with_intercept(X[:, :k]), Y)
        fit = fit_ols(data)
        Xt = _with_intercept(X_test[:, :k])
        proj = diagnostics.project_oos(fit, Xt)
        sq_err = (Y_test - predict(fit, Xt)) ** 2
        per_case = tuple(
            PerCaseRecord(
                case_id=j,
                oos_leverage=float(proj.oos_leverage[j]),
                projected_sq_error=float(proj.per_case_projected_sq_error[j]),
                actual_sq_error=float(sq_err[j]),
            )
            for j in range(sample)
        )
        results.append(
            IterationResult(
                iteration=iteration,
                k=k,
                train_mse=float(np.mean(fit.residuals**2)),
                test_mse=float(np.mean(sq_err)),
                press_over_n=diagnostics.press(fit) / cfg.n_train,
                proposed_mse=proj.projected_mse,
                per_case=per_case,
                train_leverage=tuple(
                    float(h) for h in fit.leverage[: min(cfg.per_case_sample, cfg.n_train)]
                ),
            )
        )
    return results


@dataclass
class GridResult:
    """In-memory result store for one grid run."""

    results: dict[str, list[IterationResult]]
    failures: list[tuple[str, int, str]]


def run_grid(cfgs: list[SimConfig], threads: int = 1) -> GridResult:
    """Run every (config, iteration) cell; failures are collected, not fatal.

    Thread count never affects output: each cell's stream is private and
    results are ordered by (iteration, k) before returning.
    """
    ids = [c.config_id for c in cfgs]
    if len(set(ids)) != len(ids):
        raise ConfigError("duplicate config_id in grid")
    results: dict[str, list[IterationResult]] = {c.config_id: [] for c in cfgs}
    failures: list[tuple[str, int, str]] = []

    cells = [(cfg, it) for cfg in cfgs for it in range(cfg.iterations)]

    def run_cell(cell):
        cfg, it = cell
        try:
            return cfg.config_id, it, run_iteration(cfg, it), None
        except Exception as exc:  # noqa: BLE001 - per-cell isolation
            return cfg.config_id, it, None, f"iteration {it}: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run_cell, cells))
    else:
        outcomes = [run_cell(c) for c in cells]

    for config_id, it, rows, error in outcomes:
        if error is not None:
            failures.append((config_id, it, error))
        else:
            results[config_id].extend(rows)
    for config_id in results:
        results[config_id].sort(key=lambda r: (r.iteration, r.k))
    failures.sort()
    return GridResult(results=results, failures=failures)
