"""Pearson correlation screen over the client feature matrix, with two-sided
significance tests (t distribution, n - 2 degrees of freedom)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ValidationError
from .metrics import FEATURE_COLUMNS, ClientFeatureRow


@dataclass(frozen=True)
class CorrelationReport:
    """Symmetric correlation matrix with p-values. Undefined cells (a
    constant column) are NaN and render as NA."""

    columns: tuple[str, ...]
    matrix: np.ndarray
    p_values: np.ndarray
    n: int

    def correlation(self, a: str, b: str) -> float:
        return float(self.matrix[self.columns.index(a), self.columns.index(b)])

    def star(self, i: int, j: int) -> str:
        p = self.p_values[i, j]
        if math.isnan(p):
            return ""
        if p < 0.01:
            return "**"
        if p < 0.05:
            return "*"
        return ""


def pearson_matrix(
    rows: list[ClientFeatureRow], columns: list[str] | None = None
) -> CorrelationReport:
    """Correlations between all feature columns over the labeled rows.

    Requires at least 3 labeled rows. p-values use
    t = r * sqrt((n - 2) / (1 - r^2)); the diagonal is exactly 1.
    """
    columns = list(columns) if columns is not None else list(FEATURE_COLUMNS)
    eligible = [row for row in rows if row.fit_eligible]
    n = len(eligible)
    if n < 3:
        raise ValidationError(f"need at least 3 labeled rows for correlations, got {n}")

    data = np.array([[row.value(c) for c in columns] for row in eligible], dtype=float)
    centered = data - data.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))

    k = len(columns)
    matrix = np.full((k, k), np.nan)
    p_values = np.full((k, k), np.nan)
    df = n - 2
    for i in range(k):
        if norms[i] == 0.0:
            continue  # constant column: correlation undefined
        for j in range(i, k):
            if norms[j] == 0.0:
                continue
            if i == j:
                r, p = 1.0, 0.0
            else:
                r = float(centered[:, i] @ centered[:, j] / (norms[i] * norms[j]))
                r = max(-1.0, min(1.0, r))
                if abs(r) == 1.0:
                    p = 0.0
                else:
                    t = r * math.sqrt(df / (1.0 - r * r))
                    p = 2.0 * float(stats.t.sf(abs(t), df))
            matrix[i, j] = matrix[j, i] = r
            p_values[i, j] = p_values[j, i] = p
    return CorrelationReport(columns=tuple(columns), matrix=matrix, p_values=p_values, n=n)
