# codeswitch/core/stats_engine.py
"""
Dummy-coded OLS with length interactions, coefficient inference, nested-model
F tests and Q-Q residual data.

Models (Positive is the reference sentiment):
  1a  en_prop      ~ sentiment
  1b  en_prop      ~ sentiment * token_count
  2a  switch_count ~ sentiment
  2b  switch_count ~ sentiment * token_count
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.linalg import solve_triangular

from codeswitch.config import Config
from codeswitch.core.corpus_io import ANALYSIS_LABELS, SentimentLabel
from codeswitch.core.cs_metrics import UtteranceMetrics
from codeswitch.core.distributions import f_survival, normal_quantile, two_sided_t_pvalue
from codeswitch.errors import AlignmentError, DegenerateModelError, InputFormatError
from codeswitch.utils.log import get_logger

log = get_logger("stats")

INTERCEPT = "intercept"


class Outcome(str, Enum):
    EN_PROP = "en_prop"
    SWITCH_COUNT = "switch_count"

    def of(self, m: UtteranceMetrics) -> float:
        return float(m.en_prop if self is Outcome.EN_PROP else m.switch_count)


# --------------------------------- terms ---------------------------------

@dataclass(frozen=True)
class CategoricalTerm:
    variable: str = "sentiment"
    reference: SentimentLabel = SentimentLabel.POSITIVE
    levels: tuple[SentimentLabel, ...] = ANALYSIS_LABELS

    def __post_init__(self) -> None:
        if self.variable != "sentiment":
            raise ValueError(f"unsupported categorical variable {self.variable!r}")
        if self.reference is not SentimentLabel.POSITIVE:
            raise ValueError("the reference sentiment level must be Positive")
        if self.reference not in self.levels:
            raise ValueError("reference level missing from levels")

    @property
    def dummies(self) -> tuple[SentimentLabel, ...]:
        return tuple(s for s in self.levels if s is not self.reference)

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(s.value for s in self.dummies)


@dataclass(frozen=True)
class NumericTerm:
    variable: str = "token_count"

    def __post_init__(self) -> None:
        if self.variable != "token_count":
            raise ValueError(f"unsupported numeric variable {self.variable!r}")

    @property
    def columns(self) -> tuple[str, ...]:
        return (self.variable,)


@dataclass(frozen=True)
class InteractionTerm:
    categorical: CategoricalTerm = field(default_factory=CategoricalTerm)
    numeric: NumericTerm = field(default_factory=NumericTerm)

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(f"{c}:{self.numeric.variable}" for c in self.categorical.columns)


Term = Union[CategoricalTerm, NumericTerm, InteractionTerm]

SENTIMENT = CategoricalTerm()
LENGTH = NumericTerm()
SENTIMENT_X_LENGTH = InteractionTerm(SENTIMENT, LENGTH)


@dataclass(frozen=True)
class ModelSpec:
    name: str
    outcome: Outcome
    predictors: tuple[Term, ...]
    include_intercept: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "outcome", Outcome(self.outcome))
        object.__setattr__(self, "predictors", tuple(self.predictors))
        if not self.include_intercept:
            raise ValueError("models always include an intercept")
        for term in self.predictors:
            if isinstance(term, InteractionTerm):
                if term.categorical not in self.predictors or term.numeric not in self.predictors:
                    raise ValueError(
                        f"{self.name}: interaction {term.columns} needs both main effects"
                    )

    @property
    def column_names(self) -> tuple[str, ...]:
        names = [INTERCEPT]
        for term in self.predictors:
            names.extend(term.columns)
        return tuple(names)


MODEL_1A = ModelSpec("model_1a", Outcome.EN_PROP, (SENTIMENT,))
MODEL_1B = ModelSpec("model_1b", Outcome.EN_PROP, (SENTIMENT, LENGTH, SENTIMENT_X_LENGTH))
MODEL_2A = ModelSpec("model_2a", Outcome.SWITCH_COUNT, (SENTIMENT,))
MODEL_2B = ModelSpec("model_2b", Outcome.SWITCH_COUNT, (SENTIMENT, LENGTH, SENTIMENT_X_LENGTH))

MODELS: tuple[ModelSpec, ...] = (MODEL_1A, MODEL_1B, MODEL_2A, MODEL_2B)
# (report name, reduced, full)
MODEL_PAIRS: tuple[tuple[str, ModelSpec, ModelSpec], ...] = (
    ("anova_1", MODEL_1A, MODEL_1B),
    ("anova_2", MODEL_2A, MODEL_2B),
)


# -------------------------------- results --------------------------------

@dataclass(frozen=True, eq=False)
class DesignMatrix:
    values: np.ndarray
    column_names: tuple[str, ...]
    spec: Optional[ModelSpec] = None

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != len(self.column_names):
            raise ValueError(f"design shape {v.shape} does not match {len(self.column_names)} column names")
        if v.shape[0] and not np.all(v[:, 0] == 1.0):
            raise ValueError("first design column must be the all-ones intercept")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "column_names", tuple(self.column_names))

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def p(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True, eq=False)
class FitResult:
    column_names: tuple[str, ...]
    coefficients: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    outcome: np.ndarray
    rss: float
    tss: float
    r_squared: float
    adj_r_squared: float
    df_residual: int
    spec: Optional[ModelSpec] = None
    # filled by coefficient_inference
    standard_errors: Optional[np.ndarray] = None
    t_values: Optional[np.ndarray] = None
    p_values: Optional[np.ndarray] = None
    degenerate: bool = False

    @property
    def n(self) -> int:
        return int(self.outcome.shape[0])

    @property
    def p(self) -> int:
        return int(self.coefficients.shape[0])

    @property
    def name(self) -> str:
        return self.spec.name if self.spec is not None else "model"

    def coefficient(self, column: str) -> float:
        return float(self.coefficients[self.column_names.index(column)])

    def to_dict(self) -> dict:
        rows = []
        for i, name in enumerate(self.column_names):
            rows.append({
                "name": name,
                "estimate": float(self.coefficients[i]),
                "std_error": None if self.standard_errors is None else float(self.standard_errors[i]),
                "t": None if self.t_values is None else float(self.t_values[i]),
                "p": None if self.p_values is None else float(self.p_values[i]),
            })
        return {
            "model": self.name,
            "outcome": self.spec.outcome.value if self.spec is not None else None,
            "coefficients": rows,
            "r_squared": self.r_squared,
            "adj_r_squared": self.adj_r_squared,
            "rss": self.rss,
            "tss": self.tss,
            "df_residual": self.df_residual,
            "n": self.n,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class AnovaResult:
    f_statistic: float
    df_numerator: int
    df_denominator: int
    p_value: float
    rss_reduced: float
    rss_full: float
    reduced: str = ""
    full: str = ""

    def to_dict(self) -> dict:
        return {
            "reduced": self.reduced,
            "full": self.full,
            "f": self.f_statistic,
            "df1": self.df_numerator,
            "df2": self.df_denominator,
            "p": self.p_value,
            "rss_reduced": self.rss_reduced,
            "rss_full": self.rss_full,
        }


@dataclass(frozen=True, eq=False)
class QQData:
    theoretical: np.ndarray
    sample: np.ndarray

    def __len__(self) -> int:
        return int(self.theoretical.shape[0])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "theoretical_quantile": self.theoretical,
            "standardized_residual": self.sample,
        })


# ------------------------------ design matrix ------------------------------

def build_design_matrix(
    records: Sequence[UtteranceMetrics],
    spec: ModelSpec,
) -> tuple[DesignMatrix, np.ndarray]:
    if not records:
        raise InputFormatError("no records to model")
    for m in records:
        if m.sentiment not in ANALYSIS_LABELS:
            label = m.sentiment.value if m.sentiment is not None else None
            raise InputFormatError(f"unexpected sentiment class {label!r} (utterance id {m.id})")

    length = np.asarray([m.token_count for m in records], dtype=np.float64)
    columns: list[np.ndarray] = [np.ones(len(records))]
    for term in spec.predictors:
        if isinstance(term, CategoricalTerm):
            for level in term.dummies:
                columns.append(np.asarray([m.sentiment is level for m in records], dtype=np.float64))
        elif isinstance(term, NumericTerm):
            columns.append(length)
        else:
            for level in term.categorical.dummies:
                dummy = np.asarray([m.sentiment is level for m in records], dtype=np.float64)
                columns.append(dummy * length)
    y = np.asarray([spec.outcome.of(m) for m in records], dtype=np.float64)
    return DesignMatrix(np.column_stack(columns), spec.column_names, spec), y


# ----------------------------------- OLS -----------------------------------

def _qr(design: DesignMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR with the rank check; names the first dependent column."""
    x = design.values
    if design.n < design.p:
        raise DegenerateModelError(f"{design.n} observations for {design.p} design columns")
    q, r = np.linalg.qr(x, mode="reduced")
    pivots = np.abs(np.diag(r))
    scale = pivots.max() if pivots.size else 0.0
    for j, piv in enumerate(pivots):
        if scale == 0.0 or piv < Config.OLS_RANK_TOL * scale:
            raise DegenerateModelError(
                f"design matrix is rank-deficient: column '{design.column_names[j]}' "
                f"depends on the preceding columns"
            )
    return q, r


def fit_ols(design: DesignMatrix, y: np.ndarray) -> FitResult:
    y = np.array(y, dtype=np.float64)
    if y.shape != (design.n,):
        raise AlignmentError(f"outcome length {y.shape[0]} != {design.n} design rows")
    q, r = _qr(design)
    beta = solve_triangular(r, q.T @ y, lower=False)
    fitted = design.values @ beta
    resid = y - fitted
    rss = float(resid @ resid)
    centered = y - y.mean()
    tss = float(centered @ centered)
    df = design.n - design.p

    r2 = min(max(1.0 - rss / tss, 0.0), 1.0) if tss > 0.0 else 0.0
    adj = 1.0 - (1.0 - r2) * (design.n - 1) / df if (tss > 0.0 and df > 0) else math.nan

    for a in (beta, resid, fitted, y):
        a.setflags(write=False)
    return FitResult(
        column_names=design.column_names,
        coefficients=beta,
        residuals=resid,
        fitted=fitted,
        outcome=y,
        rss=rss,
        tss=tss,
        r_squared=r2,
        adj_r_squared=adj,
        df_residual=df,
        spec=design.spec,
    )


def _is_perfect_fit(fit: FitResult) -> bool:
    return fit.rss <= Config.OLS_RSS_ZERO_TOL * max(fit.tss, 1.0)


def coefficient_inference(fit: FitResult, design: DesignMatrix) -> FitResult:
    """Standard errors from s^2 (X'X)^-1 = s^2 R^-1 R^-T, two-sided t p-values."""
    if design.column_names != fit.column_names or design.n != fit.n:
        raise AlignmentError("design matrix does not match the fitted model")
    if fit.df_residual <= 0:
        raise DegenerateModelError(f"{fit.name}: zero residual degrees of freedom")
    _, r = _qr(design)
    r_inv = solve_triangular(r, np.eye(design.p), lower=False)
    unscaled = np.sum(r_inv * r_inv, axis=1)

    if _is_perfect_fit(fit):
        log.warning("%s: perfect fit (rss=%.3g); standard errors set to 0", fit.name, fit.rss)
        se = np.zeros(fit.p)
        t = np.full(fit.p, math.nan)
        p = np.zeros(fit.p)
        degenerate = True
    else:
        s2 = fit.rss / fit.df_residual
        se = np.sqrt(s2 * unscaled)
        t = fit.coefficients / se
        p = np.asarray([two_sided_t_pvalue(float(v), fit.df_residual) for v in t])
        degenerate = False

    for a in (se, t, p):
        a.setflags(write=False)
    return replace(fit, standard_errors=se, t_values=t, p_values=p, degenerate=degenerate)


def fit_model(records: Sequence[UtteranceMetrics], spec: ModelSpec) -> FitResult:
    design, y = build_design_matrix(records, spec)
    fit = coefficient_inference(fit_ols(design, y), design)
    log.info("%s: n=%d p=%d R^2=%.4f", spec.name, fit.n, fit.p, fit.r_squared)
    return fit


# ---------------------------------- ANOVA ----------------------------------

def anova_compare(reduced: FitResult, full: FitResult) -> AnovaResult:
    """F = ((RSS_r - RSS_f) / dp) / (RSS_f / df_f) for nested models on the same data."""
    if reduced.n != full.n or not np.array_equal(reduced.outcome, full.outcome):
        raise AlignmentError(
            f"{reduced.name} and {full.name} were fitted on different observations"
        )
    extra = set(reduced.column_names) - set(full.column_names)
    if extra:
        raise DegenerateModelError(
            f"{reduced.name} is not nested in {full.name}: {sorted(extra)} missing from the full model"
        )
    dp = full.p - reduced.p
    if dp <= 0:
        raise DegenerateModelError(f"{full.name} adds no columns to {reduced.name}")
    if full.df_residual <= 0 or _is_perfect_fit(full):
        raise DegenerateModelError(f"saturated full model: {full.name} leaves no residual variance")

    numerator = max(reduced.rss - full.rss, 0.0) / dp
    denominator = full.rss / full.df_residual
    f = numerator / denominator
    return AnovaResult(
        f_statistic=f,
        df_numerator=dp,
        df_denominator=full.df_residual,
        p_value=f_survival(f, dp, full.df_residual),
        rss_reduced=reduced.rss,
        rss_full=full.rss,
        reduced=reduced.name,
        full=full.name,
    )


# ----------------------------------- Q-Q -----------------------------------

def qq_points(residuals: Sequence[float]) -> QQData:
    r = np.asarray(residuals, dtype=np.float64)
    n = r.shape[0]
    if n < 3:
        raise DegenerateModelError(f"Q-Q data needs at least 3 residuals, got {n}")
    sd = float(np.std(r, ddof=1))
    if not sd > 0.0:
        raise DegenerateModelError("zero residual variance")
    sample = np.sort(r / sd)
    theoretical = np.asarray([normal_quantile((i - 0.5) / n) for i in range(1, n + 1)])
    return QQData(theoretical=theoretical, sample=sample)


def qq_data(fit: FitResult) -> QQData:
    """Sorted standardized residuals against normal quantiles at (i - 0.5)/n."""
    return qq_points(fit.residuals)
