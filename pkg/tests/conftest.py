import numpy as np
import pytest

from oosmse.linalg import Dataset


@pytest.fixture
def three_point() -> Dataset:
    """Intercept-plus-slope design at x = 0, 1, 2 with Y = [1, 2, 4].

    Hand-solved: beta = [5/6, 3/2], residuals = [1/6, -1/3, 1/6],
    leverage = [5/6, 1/3, 5/6].
    """
    X = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]])
    return Dataset(X, np.array([1.0, 2.0, 4.0]))


def random_dataset(
    seed: int,
    n: int | None = None,
    k: int | None = None,
    intercept: bool = True,
    near_collinear: bool = False,
) -> Dataset:
    """Random full-rank regression problem for property checks."""
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(10, 51))
    if k is None:
        k = int(rng.integers(1, 9))
    cols = [np.ones(n)] if intercept else []
    cols.append(rng.standard_normal((n, k)))
    X = np.column_stack(cols)
    if near_collinear and k >= 1:
        # Append an almost-duplicate of the first random column.
        X = np.column_stack([X, X[:, -1] + 1e-6 * rng.standard_normal(n)])
    Y = rng.standard_normal(n)
    return Dataset(X, Y)
