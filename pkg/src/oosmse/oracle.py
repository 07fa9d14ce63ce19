"""Slow reference implementations used to validate the fast paths in tests.

Deliberately shares no solver code with the main kernel: coefficients come
from Gaussian elimination with partial pivoting on the normal equations,
written out longhand, so agreement with the QR path is evidence rather than
tautology. Single-threaded, O(n) refits; performance is irrelevant here.
"""

from __future__ import annotations

import numpy as np

from .errors import RankDeficientError
from .linalg import Dataset, HatMatrix

_PIVOT_TOL = 1e-12


def _gaussian_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b by elimination with partial pivoting. A is overwritten-safe."""
    A = np.array(A, dtype=np.float64)
    b = np.array(b, dtype=np.float64)
    k = A.shape[0]
    for col in range(k):
        pivot_row = col + int(np.argmax(np.abs(A[col:, col])))
        if abs(A[pivot_row, col]) < _PIVOT_TOL * max(1.0, np.abs(A).max()):
            raise RankDeficientError("normal equations are singular")
        if pivot_row != col:
            A[[col, pivot_row]] = A[[pivot_row, col]]
            b[[col, pivot_row]] = b[[pivot_row, col]]
        for row in range(col + 1, k):
            factor = A[row, col] / A[col, col]
            A[row, col:] -= factor * A[col, col:]
            b[row] -= factor * b[col]
    x = np.zeros(k)
    for col in range(k - 1, -1, -1):
        x[col] = (b[col] - A[col, col + 1 :] @ x[col + 1 :]) / A[col, col]
    return x


def _ols_normal_equations(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return _gaussian_solve(X.T @ X, X.T @ Y)


def loo_residual_bruteforce(data: Dataset, i: int) -> float:
    """y_i minus the forecast from a refit that excludes row i."""
    keep = np.ones(data.n, dtype=bool)
    keep[i] = False
    beta = _ols_normal_equations(data.X[keep], data.Y[keep])
    return float(data.Y[i] - data.X[i] @ beta)


def press_bruteforce(data: Dataset) -> float:
    """Sum of squared leave-one-out residuals via n explicit refits."""
    return float(
        sum(loo_residual_bruteforce(data, i) ** 2 for i in range(data.n))
    )


def expected_sq_error_sums(
    H: HatMatrix, sigma2: np.ndarray
) -> tuple[float, float]:
    """Theoretical expected in/out-of-sample residual sums of squares.

    For a fixed design reused between training and test, the expected
    in-sample sum is sum (1-h_i) sigma_i^2 and the out-of-sample sum is
    sum (1+h_i) sigma_i^2.
    """
    sigma2 = np.asarray(sigma2, dtype=np.float64).ravel()
    if np.any(sigma2 < 0):
        raise ValueError("sigma2 must be nonnegative")
    h = H.diagonal
    if h.shape[0] != sigma2.shape[0]:
        raise ValueError("sigma2 length must match the hat matrix")
    return (
        float(np.sum((1.0 - h) * sigma2)),
        float(np.sum((1.0 + h) * sigma2)),
    )
