"""Exception taxonomy shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
NumericError -> 3.
"""

from __future__ import annotations


class PersistnetError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(PersistnetError):
    """Invalid or inconsistent run configuration."""


class DataError(PersistnetError):
    """Unreadable, malformed, or insufficient input data."""


class NumericError(PersistnetError):
    """Numerical failure inside a compute stage (non-finite values, broken
    covariance, infeasible fit)."""


class StageError(PersistnetError):
    """Failure of a named pipeline stage; wraps the underlying cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
