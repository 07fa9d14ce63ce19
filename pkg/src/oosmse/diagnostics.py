"""Prediction-error estimators.

PRESS and jackknife residuals, the non-stochastic projected MSE
(1/n) sum (1+h)/(1-h) e^2, the auxiliary variance regression, out-of-sample
leverage, and the per-case stochastic projection whose aggregate is
(1/m) sum_j sum_i (w_ji + w_ji^2) e*_i^2 with w the out-of-sample hat rows
and e*_i^2 = e_i^2 / (1 - h_i).

The per-case projection is computed from k x k quadratic forms in the QR
factors, never materializing the m x n out-of-sample hat matrix:
sum_i w_ji e*_i^2 = u_j (Q'e*2) and sum_i w_ji^2 e*_i^2 = u_j (Q'DQ) u_j'
with u_j = x_j R^-1 and D = diag(e*2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, LeverageAtOneError
from .linalg import (
    LEVERAGE_TOL,
    Dataset,
    OlsFit,
    OosHatMatrix,
    design_weights,
    predict,
)


@dataclass(frozen=True)
class OosProjection:
    """Per-test-case projected squared errors plus their aggregate.

    Negative per-case values are legitimate outputs of the estimator and are
    counted rather than clamped (unless clamping was requested explicitly).
    """

    per_case_projected_sq_error: np.ndarray
    oos_leverage: np.ndarray
    projected_mse: float
    negative_projection_count: int


@dataclass(frozen=True)
class VarianceModel:
    """Auxiliary regression of scaled squared residuals on the predictors."""

    gamma_hat: np.ndarray
    fitted_train_variance: np.ndarray
    method: str = "scaled_sq_residuals"


def _scaled_sq(fit: OlsFit) -> np.ndarray:
    if fit.scaled_sq_residuals is None or np.any(
        fit.leverage >= 1.0 - LEVERAGE_TOL
    ):
        raise LeverageAtOneError(
            "some training leverage is at 1 within tolerance; "
            "1/(1-h) quantities are undefined"
        )
    return fit.scaled_sq_residuals


def scaled_sq_residuals(fit: OlsFit) -> np.ndarray:
    """Entrywise e_i^2 / (1 - h_i), the per-observation variance proxy."""
    return _scaled_sq(fit)


def jackknife_residuals(fit: OlsFit) -> np.ndarray:
    """Leave-one-out residuals e_i / (1 - h_i), without refitting."""
    _scaled_sq(fit)
    return fit.residuals / (1.0 - fit.leverage)


def press(fit: OlsFit) -> float:
    """Predicted residual error sum of squares: sum of squared LOO residuals."""
    return float(np.sum(jackknife_residuals(fit) ** 2))


def mse_nonstochastic(fit: OlsFit) -> float:
    """Projected out-of-sample MSE when the test design equals the training one."""
    h = fit.leverage
    _scaled_sq(fit)
    return float(np.mean((1.0 + h) / (1.0 - h) * fit.residuals**2))


def fit_variance_model(fit: OlsFit, data: Dataset) -> VarianceModel:
    """Regress scaled squared residuals on the training predictors.

    Reuses the training QR factors (the design is identical), so gamma_hat
    is exactly the coefficient vector fit_ols would produce for the
    substituted outcome.
    """
    if data.X.shape != fit.design.shape or not np.array_equal(data.X, fit.design):
        raise DimensionMismatchError("fit was not produced from this dataset")
    e_star2 = _scaled_sq(fit)
    gamma = scipy.linalg.solve_triangular(fit.r_factor, fit.q_factor.T @ e_star2)
    return VarianceModel(
        gamma_hat=gamma,
        fitted_train_variance=data.X @ gamma,
    )


def oos_leverage(ho: OosHatMatrix) -> np.ndarray:
    """Sum of squared out-of-sample hat-row elements for each test case."""
    return np.sum(ho.Ho**2, axis=1)


def project_oos(
    fit: OlsFit, X_test: np.ndarray, clamp_negative: bool = False
) -> OosProjection:
    """Project per-test-case squared error from training residuals alone.

    Per-case value j is sum_i (w_ji + w_ji^2) e*_i^2; the aggregate is the
    plain mean. ``clamp_negative`` floors per-case values at zero for
    downstream consumers; the negative count is always taken pre-clamp.
    """
    e_star2 = _scaled_sq(fit)
    U = design_weights(fit, X_test)
    # First term: forecasted test-case residual variances X_test gamma_hat.
    term1 = U @ (fit.q_factor.T @ e_star2)
    # Second term: u_j (Q' D Q) u_j' with D = diag(e*2).
    middle = fit.q_factor.T @ (e_star2[:, None] * fit.q_factor)
    term2 = np.einsum("ij,jk,ik->i", U, middle, U)
    per_case = term1 + term2
    negative = int(np.sum(per_case < 0.0))
    if clamp_negative:
        per_case = np.maximum(per_case, 0.0)
    return OosProjection(
        per_case_projected_sq_error=per_case,
        oos_leverage=np.einsum("ij,ij->i", U, U),
        projected_mse=float(np.mean(per_case)),
        negative_projection_count=negative,
    )


def actual_test_mse(fit: OlsFit, X_test: np.ndarray, Y_test: np.ndarray) -> float:
    """Realized mean squared prediction error on a labelled test set."""
    Y_test = np.asarray(Y_test, dtype=np.float64).ravel()
    yhat = predict(fit, X_test)
    if yhat.shape[0] != Y_test.shape[0]:
        raise DimensionMismatchError(
            f"{yhat.shape[0]} test rows but {Y_test.shape[0]} test outcomes"
        )
    return float(np.mean((Y_test - yhat) ** 2))
