"""Gap filling, hourly resampling, chronological splitting and min-max scaling.

The minute stream is made complete by neighbour-mean imputation, rolled up
into calendar-hour totals (voltage is averaged, everything else summed), cut
into a train/test split that preserves time order, and scaled to [0, 1] with
ranges fitted on the training slice only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .ingest import MEASUREMENT_FIELDS, MinuteRecord

HOURLY_FIELDS = MEASUREMENT_FIELDS  # same seven measurements, hour-aggregated


@dataclass(slots=True)
class HourlyRecord:
    """One calendar hour of consumption.

    Power, intensity and sub-meter columns are sums of the minute readings in
    the hour; ``voltage`` is their mean.  ``minute_count`` says how many
    minutes contributed (boundary hours may be partial).
    """

    hour_start: datetime
    global_active_power: float
    global_reactive_power: float
    voltage: float
    global_intensity: float
    sub_metering_1: float
    sub_metering_2: float
    sub_metering_3: float
    minute_count: int


@dataclass
class ImputationReport:
    """How many cells were filled, per column."""

    imputed: dict[str, int] = field(default_factory=lambda: {f: 0 for f in MEASUREMENT_FIELDS})

    @property
    def total(self) -> int:
        return sum(self.imputed.values())


@dataclass(frozen=True)
class FeatureRange:
    minimum: float
    maximum: float

    @property
    def constant(self) -> bool:
        return self.minimum == self.maximum


@dataclass(frozen=True)
class NormalizationParams:
    """Per-feature min/max fitted on the training slice only."""

    ranges: dict[str, FeatureRange]
    fitted_on: str = "train"

    def range_for(self, feature: str) -> FeatureRange:
        try:
            return self.ranges[feature]
        except KeyError:
            raise KeyError(f"no range fitted for feature {feature!r}") from None


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    boundary_index: int


class ImputationError(ValueError):
    """A column has no values at all, so neighbour averaging cannot run."""


def impute_missing(records: list[MinuteRecord]) -> tuple[list[MinuteRecord], ImputationReport]:
    """Fill every missing cell with the mean of its nearest non-missing
    neighbours in the same column (a single neighbour at the boundaries).

    Records are updated in place and the same list is returned alongside the
    per-column fill counts.
    """
    report = ImputationReport()
    n = len(records)
    if n == 0:
        return records, report
    positions = np.arange(n)
    for name in MEASUREMENT_FIELDS:
        column = np.fromiter(
            (math.nan if v is None else v for v in (getattr(r, name) for r in records)),
            dtype=float,
            count=n,
        )
        valid = ~np.isnan(column)
        if valid.all():
            continue
        if not valid.any():
            raise ImputationError(f"column {name!r} has no observed values")
        prev_idx = np.maximum.accumulate(np.where(valid, positions, -1))
        next_idx = np.minimum.accumulate(np.where(valid, positions, n)[::-1])[::-1]
        for i in np.nonzero(~valid)[0]:
            p, q = prev_idx[i], next_idx[i]
            if p < 0:
                value = column[q]
            elif q >= n:
                value = column[p]
            else:
                value = (column[p] + column[q]) / 2.0
            setattr(records[i], name, float(value))
        report.imputed[name] = int((~valid).sum())
    return records, report


def resample_hourly(records: list[MinuteRecord]) -> list[HourlyRecord]:
    """Roll complete minute records up into one record per calendar hour.

    Timestamps are floored to the hour; partial first/last hours are kept
    with their actual minute counts.  Input must be imputed and in time
    order.
    """
    hours: list[HourlyRecord] = []
    current_hour: datetime | None = None
    sums = [0.0] * 7
    count = 0

    def flush() -> None:
        gap, grp, volt_sum, gi, s1, s2, s3 = sums
        hours.append(
            HourlyRecord(current_hour, gap, grp, volt_sum / count, gi, s1, s2, s3, count)
        )

    for rec in records:
        hour = rec.timestamp.replace(minute=0, second=0, microsecond=0)
        if hour != current_hour:
            if current_hour is not None:
                if hour < current_hour:
                    raise ValueError(f"records out of order near {rec.timestamp}")
                flush()
            current_hour = hour
            sums = [0.0] * 7
            count = 0
        try:
            sums[0] += rec.global_active_power
            sums[1] += rec.global_reactive_power
            sums[2] += rec.voltage
            sums[3] += rec.global_intensity
            sums[4] += rec.sub_metering_1
            sums[5] += rec.sub_metering_2
            sums[6] += rec.sub_metering_3
        except TypeError:
            raise ValueError(
                f"missing measurement at {rec.timestamp}; impute before resampling"
            ) from None
        count += 1
    if current_hour is not None:
        flush()
    return hours


def split_chronological(
    series: list[HourlyRecord], train_fraction: float
) -> tuple[list[HourlyRecord], list[HourlyRecord], SplitSpec]:
    """Cut the series at floor(train_fraction * len); train precedes test."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if not series:
        raise ValueError("cannot split an empty series")
    # tiny epsilon so that e.g. 0.3 * 10 (= 2.999...96 in binary) floors to 3
    boundary = math.floor(train_fraction * len(series) + 1e-9)
    if boundary == 0 or boundary == len(series):
        raise ValueError(
            f"degenerate split: {boundary}/{len(series) - boundary} at fraction {train_fraction}"
        )
    spec = SplitSpec(train_fraction=train_fraction, boundary_index=boundary)
    return series[:boundary], series[boundary:], spec


def fit_minmax(train: list[HourlyRecord], features: tuple[str, ...] = HOURLY_FIELDS) -> NormalizationParams:
    """Scan the training slice for per-feature minima and maxima."""
    if not train:
        raise ValueError("cannot fit normalization on an empty series")
    ranges = {}
    for name in features:
        values = [getattr(r, name) for r in train]
        ranges[name] = FeatureRange(minimum=min(values), maximum=max(values))
    return NormalizationParams(ranges=ranges)


def scale(value, params: NormalizationParams, feature: str = "global_active_power"):
    """Map a value (or array) onto the train range: (v - min) / (max - min).

    A constant feature maps to 0 by convention.  Values outside the train
    range are passed through unclamped, so test data may leave [0, 1].
    """
    r = params.range_for(feature)
    if r.constant:
        return np.zeros_like(np.asarray(value, dtype=float)) if isinstance(value, np.ndarray) else 0.0
    return (value - r.minimum) / (r.maximum - r.minimum)


def inverse_scale(value, params: NormalizationParams, feature: str = "global_active_power"):
    """Exact inverse of :func:`scale`; a constant feature inverts to its value."""
    r = params.range_for(feature)
    if r.constant:
        return np.full_like(np.asarray(value, dtype=float), r.minimum) if isinstance(value, np.ndarray) else r.minimum
    return value * (r.maximum - r.minimum) + r.minimum
