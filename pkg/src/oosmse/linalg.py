"""Dense OLS kernel: fitting, hat matrices, leverage.

Least squares is solved through a QR decomposition of the design matrix;
(X'X)^-1 is derived from the R factor afterwards because the out-of-sample
hat matrix and the auxiliary variance regression reuse it. Full n x n hat
matrices are only materialized on explicit request; leverage and
out-of-sample leverage are computed row-wise from the factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, NonFiniteValueError, RankDeficientError

# X is treated as rank-deficient when min/max of |diag(R)| falls below this.
RANK_TOL = 1e-10

# Leverage at or above 1 - LEVERAGE_TOL makes 1/(1-h) quantities undefined.
LEVERAGE_TOL = 1e-8


def _as_readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dataset:
    """Predictor matrix (n x k) plus outcome vector (length n)."""

    X: np.ndarray
    Y: np.ndarray
    column_names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        Y = np.asarray(self.Y, dtype=np.float64).ravel()
        if X.ndim != 2:
            raise DimensionMismatchError("X must be a 2-d matrix")
        if X.shape[0] != Y.shape[0]:
            raise DimensionMismatchError(
                f"X has {X.shape[0]} rows but Y has length {Y.shape[0]}"
            )
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise DimensionMismatchError("need n >= 1 and k >= 1")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise NonFiniteValueError("dataset contains NaN or infinite entries")
        if self.column_names is not None:
            names = tuple(self.column_names)
            if len(names) != X.shape[1]:
                raise DimensionMismatchError(
                    f"{len(names)} column names for {X.shape[1]} columns"
                )
            object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "X", _as_readonly(X))
        object.__setattr__(self, "Y", _as_readonly(Y))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]

    def with_intercept(self, name: str = "intercept") -> "Dataset":
        """Return a copy with a leading column of ones. Never done implicitly."""
        X = np.column_stack([np.ones(self.n), self.X])
        names = None
        if self.column_names is not None:
            names = (name,) + self.column_names
        return Dataset(X, self.Y, names)

    def take_rows(self, index: np.ndarray) -> "Dataset":
        return Dataset(self.X[index], self.Y[index], self.column_names)


@dataclass(frozen=True)
class OlsFit:
    """One OLS training fit plus the row-level quantities estimators consume.

    ``scaled_sq_residuals`` holds e_i^2 / (1 - h_i); it is None when any
    leverage is at 1 within tolerance (saturated observation).
    """

    beta_hat: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    leverage: np.ndarray
    scaled_sq_residuals: np.ndarray | None
    xtx_inverse: np.ndarray
    training_n: int
    model_k: int
    # QR factors of the training design; the decomposition defines beta_hat
    # and everything else (including xtx_inverse) is derived from it.
    q_factor: np.ndarray = field(repr=False, default=None)
    r_factor: np.ndarray = field(repr=False, default=None)
    design: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class HatMatrix:
    """Full n x n projection matrix X (X'X)^-1 X'."""

    H: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.H)


@dataclass(frozen=True)
class OosHatMatrix:
    """m x n matrix mapping training outcomes to test predictions.

    Row sums are 1 when the model has an intercept, but unlike in-sample
    hat rows, individual entries may exceed 1 in magnitude.
    """

    Ho: np.ndarray


def _qr_with_rank_check(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n, k = X.shape
    if n < k:
        raise DimensionMismatchError(f"need n >= k, got n={n}, k={k}")
    Q, R = np.linalg.qr(X)
    rdiag = np.abs(np.diag(R))
    largest = rdiag.max()
    if largest == 0.0 or rdiag.min() < RANK_TOL * largest:
        smallest = rdiag.min()
        cond = np.inf if smallest == 0.0 else largest / smallest
        raise RankDeficientError(
            f"design matrix is rank deficient (condition estimate {cond:.3e})",
            condition_estimate=float(cond),
        )
    return Q, R


def fit_ols(data: Dataset) -> OlsFit:
    """Fit ordinary least squares and return coefficients with diagnostics.

    Deterministic for identical input bits. Raises RankDeficientError when
    the smallest-to-largest |diag(R)| ratio falls below RANK_TOL.
    """
    X, Y = data.X, data.Y
    n, k = X.shape
    Q, R = _qr_with_rank_check(X)
    beta = scipy.linalg.solve_triangular(R, Q.T @ Y)
    fitted = X @ beta
    residuals = Y - fitted
    leverage = np.einsum("ij,ij->i", Q, Q)
    r_inv = scipy.linalg.solve_triangular(R, np.eye(k))
    xtx_inverse = r_inv @ r_inv.T
    one_minus_h = 1.0 - leverage
    if np.any(one_minus_h <= LEVERAGE_TOL):
        scaled = None
    else:
        scaled = _as_readonly(residuals**2 / one_minus_h)
    return OlsFit(
        beta_hat=_as_readonly(beta),
        fitted=_as_readonly(fitted),
        residuals=_as_readonly(residuals),
        leverage=_as_readonly(leverage),
        scaled_sq_residuals=scaled,
        xtx_inverse=_as_readonly(xtx_inverse),
        training_n=n,
        model_k=k,
        q_factor=_as_readonly(Q),
        r_factor=_as_readonly(R),
        design=X,
    )


def hat_matrix(data: Dataset) -> HatMatrix:
    """Materialize the full hat matrix H = Q Q'. O(n^2) storage."""
    Q, _ = _qr_with_rank_check(data.X)
    return HatMatrix(H=_as_readonly(Q @ Q.T))


def _check_test_design(fit: OlsFit, X_test: np.ndarray) -> np.ndarray:
    X_test = np.atleast_2d(np.asarray(X_test, dtype=np.float64))
    if X_test.shape[1] != fit.model_k:
        raise DimensionMismatchError(
            f"test design has {X_test.shape[1]} columns, model has {fit.model_k}"
        )
    if not np.all(np.isfinite(X_test)):
        raise NonFiniteValueError("test design contains NaN or infinite entries")
    return X_test


def design_weights(fit: OlsFit, X_test: np.ndarray) -> np.ndarray:
    """Return U = X_test R^-1, the m x k block shared by all OOS quantities.

    Row j of the out-of-sample hat matrix is u_j Q'; its squared row sum
    (out-of-sample leverage) is ||u_j||^2 since Q'Q = I.
    """
    X_test = _check_test_design(fit, X_test)
    return scipy.linalg.solve_triangular(
        fit.r_factor.T, X_test.T, lower=True
    ).T


def oos_hat_matrix(fit: OlsFit, X_test: np.ndarray) -> OosHatMatrix:
    """Materialize H-out = X_test (X'X)^-1 X'. O(m*n) storage."""
    U = design_weights(fit, X_test)
    return OosHatMatrix(Ho=_as_readonly(U @ fit.q_factor.T))


def predict(fit: OlsFit, X_test: np.ndarray) -> np.ndarray:
    """Test-set predictions X_test beta_hat."""
    X_test = _check_test_design(fit, X_test)
    return X_test @ fit.beta_hat
