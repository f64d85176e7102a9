"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class FactorNetError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FactorNetError):
    """Bad input data: malformed rows, unresolved codes, schema violations.

    ``row`` carries the 1-based CSV line number when the error is tied to a
    specific row (header = line 1).
    """

    def __init__(self, message: str, *, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class NumericalError(FactorNetError):
    """Model fitting failed numerically (non-convergence, separation)."""


class CollinearityError(NumericalError):
    """Design matrix is rank deficient."""

    def __init__(self, columns: list[str]):
        super().__init__(
            "design matrix is rank deficient; collinear columns: "
            + ", ".join(columns)
        )
        self.columns = list(columns)
