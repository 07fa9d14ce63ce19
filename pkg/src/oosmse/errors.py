"""Exception types shared across the package."""

from __future__ import annotations


class DimensionMismatchError(ValueError):
    """Input array shapes are inconsistent with each other or with a fitted model."""


class RankDeficientError(ValueError):
    """The design matrix is singular or numerically near-singular."""

    def __init__(self, message: str, condition_estimate: float | None = None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class LeverageAtOneError(ValueError):
    """Some training leverage is at or above 1 - tol; 1/(1-h) quantities are undefined."""


class NonFiniteValueError(ValueError):
    """An input contains NaN or infinite entries."""


class EmptyDatasetError(ValueError):
    """A dataset file parsed to zero usable rows."""


class ParseError(ValueError):
    """A delimited-text cell could not be parsed as a number."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class DegenerateSplitError(ValueError):
    """A train/test split left too few training rows for the requested models."""


class ConfigError(ValueError):
    """A run-config document failed schema validation."""


class SchemaMismatchError(ValueError):
    """A result store file does not carry the expected columns."""


class EmptyStoreError(ValueError):
    """A result store contains no rows."""
