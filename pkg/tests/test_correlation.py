"""Correlation screen: coefficients against a textbook oracle, p-values,
stars, and degenerate columns."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

from factornet.correlation import pearson_matrix
from factornet.errors import ValidationError
from factornet.metrics import ClientFeatureRow


def make_rows(columns: dict[str, list[float]], labels: list[int | None] | None = None):
    n = len(next(iter(columns.values())))
    labels = labels if labels is not None else [i % 2 for i in range(n)]
    rows = []
    for i in range(n):
        rows.append(
            ClientFeatureRow(
                party_id=f"P{i:03d}",
                high_risk_label=labels[i],
                missing_id=0,
                metrics={name: values[i] for name, values in columns.items()},
            )
        )
    return rows


def pearson_oracle(x: list[float], y: list[float]) -> float:
    """Plain covariance-formula recomputation with fsum."""
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    cov = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = math.fsum((a - mx) ** 2 for a in x)
    vy = math.fsum((b - my) ** 2 for b in y)
    return cov / math.sqrt(vx * vy)


class TestPearsonMatrix:
    def test_diagonal_is_one_with_stars(self):
        rows = make_rows({"a": [1.0, 2.0, 5.0, 3.0], "b": [2.0, 1.0, 0.0, 4.0]})
        report = pearson_matrix(rows, ["a", "b"])
        assert report.correlation("a", "a") == 1.0
        assert report.star(0, 0) == "**"

    def test_perfect_linearity(self):
        rows = make_rows({"a": [1.0, 2.0, 3.0], "b": [2.0, 4.0, 6.0]})
        report = pearson_matrix(rows, ["a", "b"])
        assert report.correlation("a", "b") == pytest.approx(1.0)
        assert report.p_values[0, 1] <= 1e-6
        assert report.star(0, 1) == "**"

    def test_matches_textbook_oracle_within_1e12(self):
        rng = random.Random(5)
        x = [rng.uniform(-3, 3) for _ in range(10)]
        y = [rng.uniform(-3, 3) for _ in range(10)]
        rows = make_rows({"a": x, "b": y})
        report = pearson_matrix(rows, ["a", "b"])
        assert abs(report.correlation("a", "b") - pearson_oracle(x, y)) <= 1e-12

    def test_matrix_symmetric_with_unit_diagonal(self):
        rng = random.Random(15)
        cols = {f"c{k}": [rng.gauss(0, 1) for _ in range(12)] for k in range(5)}
        report = pearson_matrix(make_rows(cols), sorted(cols))
        assert np.allclose(report.matrix, report.matrix.T, equal_nan=True)
        assert np.allclose(np.diag(report.matrix), 1.0)
        finite = report.matrix[~np.isnan(report.matrix)]
        assert np.all(finite >= -1.0) and np.all(finite <= 1.0)

    def test_constant_column_reported_na(self):
        rows = make_rows({"a": [1.0, 1.0, 1.0, 1.0], "b": [1.0, 2.0, 3.0, 4.0]})
        report = pearson_matrix(rows, ["a", "b"])
        assert math.isnan(report.correlation("a", "a"))
        assert math.isnan(report.correlation("a", "b"))
        assert report.correlation("b", "b") == 1.0

    def test_uses_only_labeled_rows(self):
        rows = make_rows(
            {"a": [1.0, 2.0, 3.0, 99.0], "b": [1.0, 2.0, 3.0, -99.0]},
            labels=[0, 1, 0, None],
        )
        report = pearson_matrix(rows, ["a", "b"])
        assert report.n == 3
        assert report.correlation("a", "b") == pytest.approx(1.0)

    def test_fewer_than_three_labeled_rows_is_error(self):
        rows = make_rows({"a": [1.0, 2.0]}, labels=[0, 1])
        with pytest.raises(ValidationError, match="at least 3"):
            pearson_matrix(rows, ["a"])

    def test_p_values_follow_t_distribution_formula(self):
        from scipy import stats

        rng = random.Random(25)
        x = [rng.gauss(0, 1) for _ in range(15)]
        y = [rng.gauss(0, 1) for _ in range(15)]
        rows = make_rows({"a": x, "b": y})
        report = pearson_matrix(rows, ["a", "b"])
        r = report.correlation("a", "b")
        t = r * math.sqrt((report.n - 2) / (1 - r * r))
        expected = 2 * stats.t.sf(abs(t), report.n - 2)
        assert report.p_values[0, 1] == pytest.approx(expected, rel=1e-12)

    def test_star_thresholds(self):
        rows = make_rows({"a": [1.0, 2.0, 3.0], "b": [2.0, 4.0, 6.0]})
        report = pearson_matrix(rows, ["a", "b"])
        assert report.star(0, 1) == "**"  # p = 0
        weak = make_rows({"a": [1.0, 2.0, 3.0, 2.5, 0.5], "b": [2.0, 1.0, 2.5, 0.5, 2.2]})
        weak_report = pearson_matrix(weak, ["a", "b"])
        assert weak_report.star(0, 1) == ""

    def test_includes_high_risk_column(self):
        rows = make_rows({"a": [1.0, 5.0, 2.0, 6.0]}, labels=[0, 1, 0, 1])
        report = pearson_matrix(rows, ["high_risk", "a"])
        assert report.correlation("high_risk", "a") == pytest.approx(
            pearson_oracle([0, 1, 0, 1], [1.0, 5.0, 2.0, 6.0])
        )
