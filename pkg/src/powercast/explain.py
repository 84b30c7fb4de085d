"""Data and model annotations plus templated answers to consumer questions.

Every sentence is rendered from computed evidence so each number in an
answer is auditable; no external explainability toolkit is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decision import DecisionRecord
from .model import TrainReport
from .preprocess import HOURLY_FIELDS, HourlyRecord

QUESTION_KINDS = ("why_controlled", "top_consumer", "consumption_breakdown")

SUB_METER_FIELDS = ("sub_metering_1", "sub_metering_2", "sub_metering_3")
APPLIANCE_LABELS = ("kitchen", "laundry room", "water heater and air conditioner")

OUTLIER_SIGMA = 3.0


@dataclass(frozen=True)
class FeatureStats:
    minimum: float
    maximum: float
    mean: float
    std: float
    q25: float
    median: float
    q75: float
    outlier_count: int


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True)
class DataAnnotation:
    """Distribution summaries and cross-feature correlation of the series."""

    features: tuple[str, ...]
    record_count: int
    stats: dict[str, FeatureStats]
    histograms: dict[str, Histogram]
    correlation: np.ndarray
    degenerate: tuple[str, ...]

    def correlation_between(self, feature_a: str, feature_b: str) -> float:
        return float(self.correlation[self.features.index(feature_a), self.features.index(feature_b)])


@dataclass(frozen=True)
class ModelAnnotation:
    """How the trained model behaved, from its losses and test residuals.

    Residuals are prediction minus actual on the normalized scale, so the
    moments line up with the recorded dimensionless MSE.  The band is the
    empirical 5%/95% residual quantile range, a confidence proxy; outlier
    sensitivity is the correlation between residual magnitude and input
    magnitude.
    """

    train_loss: tuple[float, ...]
    test_loss: tuple[float, ...]
    residual_mean: float
    residual_std: float
    max_abs_error: float
    band_low: float
    band_high: float
    outlier_sensitivity: float


@dataclass(frozen=True)
class ExplanationAnswer:
    question: str
    evidence: dict[str, tuple[float, str]]
    sentence: str


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Product-moment correlation; 0 when either side is constant."""
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt((da * da).sum() * (db * db).sum())
    if denom == 0:
        return 0.0
    return float(np.clip((da * db).sum() / denom, -1.0, 1.0))


def annotate_data(series: list[HourlyRecord], bins: int = 20) -> DataAnnotation:
    """Summary statistics, histograms and the correlation matrix of an
    hourly series."""
    if not series:
        raise ValueError("cannot annotate an empty series")
    matrix = np.array([[getattr(r, f) for f in HOURLY_FIELDS] for r in series], dtype=float)
    n = len(series)
    stats: dict[str, FeatureStats] = {}
    histograms: dict[str, Histogram] = {}
    degenerate = []
    for j, name in enumerate(HOURLY_FIELDS):
        col = matrix[:, j]
        mean = float(col.mean())
        std = float(col.std())
        if std == 0:
            degenerate.append(name)
            outliers = 0
        else:
            outliers = int((np.abs(col - mean) > OUTLIER_SIGMA * std).sum())
        q25, median, q75 = (float(q) for q in np.percentile(col, (25, 50, 75)))
        stats[name] = FeatureStats(
            minimum=float(col.min()),
            maximum=float(col.max()),
            mean=mean,
            std=std,
            q25=q25,
            median=median,
            q75=q75,
            outlier_count=outliers,
        )
        counts, edges = np.histogram(col, bins=bins)
        histograms[name] = Histogram(edges=edges, counts=counts)

    k = len(HOURLY_FIELDS)
    correlation = np.eye(k)
    for a in range(k):
        for b in range(a + 1, k):
            r = _pearson(matrix[:, a], matrix[:, b])
            correlation[a, b] = correlation[b, a] = r
    return DataAnnotation(
        features=HOURLY_FIELDS,
        record_count=n,
        stats=stats,
        histograms=histograms,
        correlation=correlation,
        degenerate=tuple(degenerate),
    )


def annotate_model(
    report: TrainReport,
    predictions: np.ndarray,
    actuals: np.ndarray,
    input_magnitude: np.ndarray | None = None,
) -> ModelAnnotation:
    """Residual statistics for test predictions on the normalized scale.

    ``input_magnitude`` defaults to |actual| when the original input windows
    are not at hand.
    """
    predictions = np.asarray(predictions, dtype=float)
    actuals = np.asarray(actuals, dtype=float)
    if predictions.size == 0 or predictions.shape != actuals.shape:
        raise ValueError("predictions and actuals must be equal-length and non-empty")
    residuals = predictions - actuals
    magnitude = np.abs(actuals) if input_magnitude is None else np.asarray(input_magnitude, dtype=float)
    band_low, band_high = (float(q) for q in np.quantile(residuals, (0.05, 0.95)))
    return ModelAnnotation(
        train_loss=tuple(report.train_loss),
        test_loss=tuple(report.test_loss),
        residual_mean=float(residuals.mean()),
        residual_std=float(residuals.std()),
        max_abs_error=float(np.abs(residuals).max()),
        band_low=band_low,
        band_high=band_high,
        outlier_sensitivity=_pearson(np.abs(residuals), magnitude),
    )


def answer(
    question: str,
    decision: DecisionRecord | None = None,
    hourly: HourlyRecord | None = None,
) -> ExplanationAnswer:
    """Render the templated answer for one question about one hour.

    ``why_controlled`` needs the hour's decision record; the other two kinds
    need its hourly record.
    """
    if question == "why_controlled":
        if decision is None:
            raise ValueError("no decision record for the requested hour")
        evidence = {
            "predicted": (decision.predicted, "kW"),
            "historical_average": (decision.baseline, "kW"),
        }
        if decision.warning:
            sentence = (
                f"Power consumption was controlled because the predicted next-hour "
                f"consumption is {decision.predicted:.1f} kW while your historical "
                f"average for this hour is {decision.baseline:.1f} kW."
            )
        else:
            sentence = (
                f"Power consumption was not controlled because the predicted next-hour "
                f"consumption of {decision.predicted:.1f} kW does not exceed your "
                f"historical average of {decision.baseline:.1f} kW."
            )
        return ExplanationAnswer(question, evidence, sentence)

    if question == "top_consumer":
        if hourly is None:
            raise ValueError("no hourly record for the requested hour")
        values = [getattr(hourly, f) for f in SUB_METER_FIELDS]
        top = max(range(3), key=lambda idx: (values[idx], -idx))  # ties -> lowest index
        evidence = {SUB_METER_FIELDS[top]: (values[top], "Wh")}
        sentence = (
            f"The {APPLIANCE_LABELS[top]} consumed the most energy this hour: "
            f"{values[top]:.1f} Wh."
        )
        return ExplanationAnswer(question, evidence, sentence)

    if question == "consumption_breakdown":
        if hourly is None:
            raise ValueError("no hourly record for the requested hour")
        values = [getattr(hourly, f) for f in SUB_METER_FIELDS]
        evidence = {f: (v, "Wh") for f, v in zip(SUB_METER_FIELDS, values)}
        sentence = (
            f"During this hour the kitchen consumed {values[0]:.1f} Wh, the laundry "
            f"room consumed {values[1]:.1f} Wh, and the water heater and air "
            f"conditioner consumed {values[2]:.1f} Wh."
        )
        return ExplanationAnswer(question, evidence, sentence)

    raise ValueError(f"unknown question kind {question!r}; expected one of {QUESTION_KINDS}")
