"""Logistic risk models: damped-Newton maximum likelihood, fit statistics
(McFadden pseudo R-squared, AIC, BIC), scoring, and model (de)serialization.

``RiskLogit`` is the scikit-learn facade (fit / predict_proba / get_params)
around the same Newton core used by the row-oriented ``fit_logit``; bundled
reference coefficient sets load through ``load_reference_model``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import stats
from scipy.linalg import qr
from scipy.special import expit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import CollinearityError, ValidationError
from .metrics import ClientFeatureRow

DEFAULT_MAX_ITER = 100
DEFAULT_SCORE_TOL = 1e-8
DEFAULT_STEP_TOL = 1e-10
_DIVERGENCE_BOUND = 1e6

#: Default predictor set for fitting when the operator chooses none.
DEFAULT_PREDICTORS = (
    "missing_id",
    "in_degree_geo",
    "constraint_sector",
    "all_degree_transactions",
    "closeness_transactions",
)

REFERENCE_MODEL_PREFIX = "paper:"


def log_likelihood(X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> float:
    """Bernoulli log-likelihood of a logistic model with design matrix X
    (intercept column included) at coefficient vector beta."""
    z = X @ beta
    # log(1 + e^z) computed stably for large |z|
    return float(y @ z - np.sum(np.logaddexp(0.0, z)))


def log_likelihood_gradient(X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Score vector X'(y - p) of the Bernoulli log-likelihood."""
    return X.T @ (y - expit(X @ beta))


def _check_full_rank(X: np.ndarray, names: Sequence[str]):
    """Raise CollinearityError naming the dependent columns, if any."""
    r_mat, pivots = qr(X, mode="r", pivoting=True)
    diag = np.abs(np.diag(r_mat))
    scale = diag[0] if diag.size and diag[0] > 0 else 1.0
    rank = int(np.sum(diag > scale * max(X.shape) * np.finfo(float).eps))
    if rank < X.shape[1]:
        raise CollinearityError([names[j] for j in sorted(pivots[rank:])])


@dataclass(frozen=True)
class NewtonFit:
    beta: np.ndarray
    loglik: float
    converged: bool
    n_iter: int
    std_errors: np.ndarray
    message: str


def newton_fit(
    X: np.ndarray,
    y: np.ndarray,
    *,
    max_iter: int = DEFAULT_MAX_ITER,
    score_tol: float = DEFAULT_SCORE_TOL,
    step_tol: float = DEFAULT_STEP_TOL,
) -> NewtonFit:
    """Maximize the Bernoulli log-likelihood by damped Newton iteration.

    Converges when the score's max-norm falls under ``score_tol`` or the
    step's max-norm under ``step_tol``. Steps are halved until the
    log-likelihood does not decrease. Diverging coefficients (the signature
    of complete separation) end the iteration with ``converged=False``.
    """
    n, k = X.shape
    beta = np.zeros(k)
    loglik = log_likelihood(X, y, beta)
    converged = False
    message = f"did not converge in {max_iter} iterations"
    it = 0

    for it in range(1, max_iter + 1):
        if loglik > -1e-6:
            # The likelihood is numerically at its supremum of 0: every case
            # is classified perfectly, so the maximizer does not exist and
            # coefficients only keep growing.
            message = (
                "log-likelihood reached 0 with diverging coefficients; "
                "the classes appear perfectly separated"
            )
            break
        p = expit(X @ beta)
        score = X.T @ (y - p)
        if np.max(np.abs(score)) < score_tol:
            converged = True
            message = "score tolerance reached"
            break
        w = np.clip(p * (1.0 - p), 1e-12, None)
        hessian = (X * w[:, None]).T @ X
        try:
            step = np.linalg.solve(hessian, score)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hessian, score, rcond=None)[0]

        # Damping: halve until the likelihood stops decreasing.
        candidate = beta + step
        new_loglik = log_likelihood(X, y, candidate)
        halvings = 0
        while new_loglik < loglik and halvings < 30:
            step = step / 2.0
            candidate = beta + step
            new_loglik = log_likelihood(X, y, candidate)
            halvings += 1

        beta, loglik = candidate, new_loglik
        if np.max(np.abs(beta)) > _DIVERGENCE_BOUND:
            message = (
                "coefficients are diverging (step norms keep growing); "
                "the classes may be perfectly separated"
            )
            break
        if np.max(np.abs(step)) < step_tol:
            converged = True
            message = "step tolerance reached"
            break

    p = expit(X @ beta)
    w = np.clip(p * (1.0 - p), 1e-12, None)
    info = (X * w[:, None]).T @ X
    try:
        cov = np.linalg.inv(info)
        std_errors = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        std_errors = np.full(k, np.nan)
    return NewtonFit(
        beta=beta,
        loglik=log_likelihood(X, y, beta),
        converged=converged,
        n_iter=it,
        std_errors=std_errors,
        message=message,
    )


def aic(loglik: float, k: int) -> float:
    return 2.0 * k - 2.0 * loglik


def bic(loglik: float, k: int, n: int) -> float:
    return k * math.log(n) - 2.0 * loglik


def mcfadden_r2(loglik: float, null_loglik: float) -> float:
    return 1.0 - loglik / null_loglik


@dataclass(frozen=True)
class LogitModel:
    """A fitted (or bundled) logistic risk model.

    ``coefficients`` holds the intercept first, then one value per entry of
    ``predictor_names``. ``standardized_coefficients`` is only present when
    the model was fit on z-scored predictors.
    """

    predictor_names: tuple[str, ...]
    coefficients: tuple[float, ...]
    n: int
    log_likelihood: float
    null_log_likelihood: float
    mcfadden_r2: float
    aic: float
    bic: float
    converged: bool
    std_errors: tuple[float, ...] | None = None
    condition_number: float | None = None
    n_iter: int | None = None
    message: str = ""
    standardized_coefficients: tuple[float, ...] | None = None

    @property
    def k(self) -> int:
        return len(self.coefficients)

    @property
    def intercept(self) -> float:
        return self.coefficients[0]

    def coefficient(self, name: str) -> float:
        return self.coefficients[1 + self.predictor_names.index(name)]

    def wald_p_values(self) -> tuple[float, ...]:
        """Two-sided normal-approximation p-values, NaN where SEs are."""
        if self.std_errors is None:
            return tuple(math.nan for _ in self.coefficients)
        out = []
        for coef, se in zip(self.coefficients, self.std_errors):
            out.append(
                2.0 * float(stats.norm.sf(abs(coef / se)))
                if se and not math.isnan(se)
                else math.nan
            )
        return tuple(out)


class RiskLogit(BaseEstimator):
    """Logistic risk classifier with maximum-likelihood Newton fitting.

    Parameters
    ----------
    standardize : fit on z-scored columns; reported ``coef_`` stays on the
        raw scale, the standardized one is kept in ``coef_standardized_``.
    max_iter, score_tol, step_tol : Newton stopping controls.

    After ``fit``, exposes ``coef_``, ``intercept_``, ``loglik_``,
    ``null_loglik_``, ``mcfadden_r2_``, ``aic_``, ``bic_``, ``converged_``.
    """

    def __init__(
        self,
        standardize: bool = False,
        max_iter: int = DEFAULT_MAX_ITER,
        score_tol: float = DEFAULT_SCORE_TOL,
        step_tol: float = DEFAULT_STEP_TOL,
    ):
        self.standardize = standardize
        self.max_iter = max_iter
        self.score_tol = score_tol
        self.step_tol = step_tol

    def fit(self, X, y, column_names: Sequence[str] | None = None):
        X, y = check_X_y(X, y, dtype=float)
        classes = np.unique(y)
        if not np.array_equal(classes, [0.0, 1.0]):
            raise ValidationError(
                f"labels must contain both classes 0 and 1, got {classes.tolist()}"
            )
        n, p = X.shape
        names = list(column_names) if column_names is not None else [f"x{j}" for j in range(p)]

        if self.standardize:
            means = X.mean(axis=0)
            sds = X.std(axis=0, ddof=0)
            if np.any(sds == 0.0):
                constant = [names[j] for j in np.flatnonzero(sds == 0.0)]
                raise CollinearityError(constant)
            Xfit = (X - means) / sds
        else:
            means = np.zeros(p)
            sds = np.ones(p)
            Xfit = X

        design = np.column_stack([np.ones(n), Xfit])
        _check_full_rank(design, ["intercept"] + names)

        fit = newton_fit(
            design, y, max_iter=self.max_iter, score_tol=self.score_tol, step_tol=self.step_tol
        )
        null_fit = newton_fit(
            np.ones((n, 1)), y, max_iter=self.max_iter, score_tol=self.score_tol, step_tol=self.step_tol
        )

        beta = fit.beta
        if self.standardize:
            raw = np.empty_like(beta)
            raw[1:] = beta[1:] / sds
            raw[0] = beta[0] - float(np.sum(beta[1:] * means / sds))
            self.coef_standardized_ = beta[1:].copy()
            se = np.empty_like(fit.std_errors)
            se[1:] = fit.std_errors[1:] / sds
            se[0] = math.nan  # intercept SE does not back-transform directly
        else:
            raw = beta
            self.coef_standardized_ = None
            se = fit.std_errors

        self.column_names_ = tuple(names)
        self.coef_ = raw[1:]
        self.intercept_ = float(raw[0])
        self.std_errors_ = se
        self.n_features_in_ = p
        self.classes_ = np.array([0, 1])
        self.loglik_ = fit.loglik
        self.null_loglik_ = null_fit.loglik
        self.mcfadden_r2_ = mcfadden_r2(fit.loglik, null_fit.loglik)
        self.aic_ = aic(fit.loglik, p + 1)
        self.bic_ = bic(fit.loglik, p + 1, n)
        self.converged_ = fit.converged
        self.n_iter_ = fit.n_iter
        self.fit_message_ = fit.message
        self.n_samples_ = n
        self.condition_number_ = float(np.linalg.cond(design))
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=float)
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        p1 = expit(self.decision_function(X))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0.0).astype(int)

    def to_model(self) -> LogitModel:
        check_is_fitted(self, "coef_")
        return LogitModel(
            predictor_names=self.column_names_,
            coefficients=(self.intercept_, *map(float, self.coef_)),
            n=self.n_samples_,
            log_likelihood=self.loglik_,
            null_log_likelihood=self.null_loglik_,
            mcfadden_r2=self.mcfadden_r2_,
            aic=self.aic_,
            bic=self.bic_,
            converged=self.converged_,
            std_errors=tuple(float(s) for s in self.std_errors_),
            condition_number=self.condition_number_,
            n_iter=self.n_iter_,
            message=self.fit_message_,
            standardized_coefficients=(
                None
                if self.coef_standardized_ is None
                else tuple(float(c) for c in self.coef_standardized_)
            ),
        )


def design_matrix(
    rows: list[ClientFeatureRow], predictors: Sequence[str]
) -> tuple[np.ndarray, np.ndarray, list[ClientFeatureRow]]:
    """(X, y, eligible_rows) over the labeled rows, columns = predictors."""
    eligible = [row for row in rows if row.fit_eligible]
    X = np.array([[row.value(c) for c in predictors] for row in eligible], dtype=float)
    y = np.array([row.high_risk_label for row in eligible], dtype=float)
    return X, y, eligible


def fit_logit(
    rows: list[ClientFeatureRow],
    predictors: Sequence[str] = DEFAULT_PREDICTORS,
    *,
    standardize: bool = False,
    max_iter: int = DEFAULT_MAX_ITER,
) -> LogitModel:
    """Fit a logistic risk model on the labeled feature rows."""
    predictors = list(predictors)
    X, y, eligible = design_matrix(rows, predictors)
    if len(eligible) < 3:
        raise ValidationError(f"need at least 3 labeled rows to fit, got {len(eligible)}")
    estimator = RiskLogit(standardize=standardize, max_iter=max_iter)
    estimator.fit(X, y, column_names=predictors)
    return estimator.to_model()


def predict(model: LogitModel, row: ClientFeatureRow | Mapping[str, float]) -> float:
    """Probability of the high-risk class for one feature row."""
    z = model.intercept
    for name, coef in zip(model.predictor_names, model.coefficients[1:]):
        if isinstance(row, ClientFeatureRow):
            value = row.value(name)
        else:
            if name not in row:
                raise ValidationError(f"missing predictor {name!r}")
            value = float(row[name])
        z += coef * value
    return float(expit(z))


def rank_clients(
    model: LogitModel, rows: list[ClientFeatureRow], top_k: int | None = None
) -> list[tuple[str, float]]:
    """Clients by descending risk probability; ties break lexicographically.
    Unlabeled parties are included — scoring them is the point."""
    scored = [(row.party_id, predict(model, row)) for row in rows]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored if top_k is None else scored[:top_k]


# --- model files -----------------------------------------------------------

def save_model(model: LogitModel, path: Path):
    payload = asdict(model)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: Path) -> LogitModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return _model_from_payload(payload, source=str(path))


def _model_from_payload(payload: dict, source: str) -> LogitModel:
    try:
        return LogitModel(
            predictor_names=tuple(payload["predictor_names"]),
            coefficients=tuple(float(c) for c in payload["coefficients"]),
            n=int(payload["n"]),
            log_likelihood=float(payload["log_likelihood"]),
            null_log_likelihood=float(payload["null_log_likelihood"]),
            mcfadden_r2=float(payload["mcfadden_r2"]),
            aic=float(payload["aic"]),
            bic=float(payload["bic"]),
            converged=bool(payload["converged"]),
            std_errors=tuple(payload["std_errors"]) if payload.get("std_errors") else None,
            condition_number=payload.get("condition_number"),
            n_iter=payload.get("n_iter"),
            message=payload.get("message", ""),
            standardized_coefficients=(
                tuple(payload["standardized_coefficients"])
                if payload.get("standardized_coefficients")
                else None
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{source}: not a valid model file ({exc})") from None


def reference_model_names() -> list[str]:
    """Names accepted by ``load_reference_model`` (without the prefix)."""
    return sorted(_reference_payloads())


def _reference_payloads() -> dict:
    text = resources.files("factornet").joinpath("data", "reference_models.json").read_text("utf-8")
    return json.loads(text)


def load_reference_model(name: str) -> LogitModel:
    """Load one of the bundled fixed-coefficient models (``model1`` ..
    ``model4``), usable for scoring without any local labeled data.

    The bundled files carry published coefficient values rounded to three
    decimals; remaining statistics are reconstructed from the identities
    linking AIC, BIC and the pseudo R-squared.
    """
    if name.startswith(REFERENCE_MODEL_PREFIX):
        name = name[len(REFERENCE_MODEL_PREFIX) :]
    payloads = _reference_payloads()
    if name not in payloads:
        raise ValidationError(
            f"unknown bundled model {name!r}; available: {', '.join(sorted(payloads))}"
        )
    entry = payloads[name]
    predictors = tuple(entry["predictors"])
    coefficients = (float(entry["intercept"]), *(float(entry["coefficients"][p]) for p in predictors))
    k = len(coefficients)
    loglik = (2.0 * k - float(entry["aic"])) / 2.0
    null_loglik = loglik / (1.0 - float(entry["mcfadden_r2"]))
    return LogitModel(
        predictor_names=predictors,
        coefficients=coefficients,
        n=int(entry["n"]),
        log_likelihood=loglik,
        null_log_likelihood=null_loglik,
        mcfadden_r2=float(entry["mcfadden_r2"]),
        aic=float(entry["aic"]),
        bic=float(entry["bic"]),
        converged=True,
        message=f"bundled reference model {name}",
    )


def resolve_model(spec: str) -> LogitModel:
    """A model from either the bundled registry (``paper:<name>``) or a
    fitted-model JSON file path."""
    if spec.startswith(REFERENCE_MODEL_PREFIX):
        return load_reference_model(spec)
    return load_model(Path(spec))
