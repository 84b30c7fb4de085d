"""Warning decisions: predicted consumption versus the personal baseline.

The baseline for an hour is the historical mean consumption of the same
(hour of day, month, weekday) group in the training history.  A prediction
strictly above its baseline raises a warning; the hour is then capped at the
baseline and the overrun is booked as saved energy.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from .preprocess import HourlyRecord

SAVINGS_BASES = ("actual", "predicted")


@dataclass(frozen=True)
class GroupMean:
    mean: float
    count: int


@dataclass(frozen=True)
class BaselineTable:
    """Historical mean consumption per (hour, month, weekday) group.

    Sparse groups resolve through coarser fallbacks: (hour, weekday), then
    (hour), then the global mean, so every timestamp gets a baseline.
    """

    exact: dict[tuple[int, int, int], GroupMean]
    by_hour_weekday: dict[tuple[int, int], GroupMean]
    by_hour: dict[int, GroupMean]
    overall: GroupMean

    def resolve(self, hour_start: datetime) -> float:
        key = (hour_start.hour, hour_start.month, hour_start.weekday())
        group = self.exact.get(key)
        if group is None:
            group = self.by_hour_weekday.get((key[0], key[2]))
        if group is None:
            group = self.by_hour.get(key[0])
        if group is None:
            group = self.overall
        return group.mean


@dataclass(frozen=True)
class DecisionRecord:
    """Outcome for one hour: warning flag, cap and booked saving."""

    hour_start: datetime
    predicted: float
    baseline: float
    actual: float
    warning: bool
    cap: float | None
    saved: float


@dataclass(frozen=True)
class SavingsReport:
    window_hours: int
    warning_count: int
    total_saved: float


def build_baseline(train: Iterable[HourlyRecord]) -> BaselineTable:
    """Group means of hourly consumption over the training history only."""

    def accumulate(sums: dict, key, value: float) -> None:
        total, count = sums.get(key, (0.0, 0))
        sums[key] = (total + value, count + 1)

    exact: dict = {}
    hour_weekday: dict = {}
    hour_only: dict = {}
    total, count = 0.0, 0
    for rec in train:
        ts = rec.hour_start
        value = rec.global_active_power
        accumulate(exact, (ts.hour, ts.month, ts.weekday()), value)
        accumulate(hour_weekday, (ts.hour, ts.weekday()), value)
        accumulate(hour_only, ts.hour, value)
        total += value
        count += 1
    if count == 0:
        raise ValueError("cannot build a baseline from an empty training series")
    as_means = lambda sums: {k: GroupMean(s / c, c) for k, (s, c) in sums.items()}
    return BaselineTable(
        exact=as_means(exact),
        by_hour_weekday=as_means(hour_weekday),
        by_hour=as_means(hour_only),
        overall=GroupMean(total / count, count),
    )


def decide(
    predicted: float,
    actual: float,
    hour_start: datetime,
    table: BaselineTable,
    savings_basis: str = "actual",
) -> DecisionRecord:
    """Compare a prediction with its baseline and book the saving.

    A warning fires only on strict exceedance.  The saving is how far the
    consumption (actual by default; the prediction under the alternative
    basis) overran the baseline cap, clamped at zero.
    """
    if predicted < 0 or actual < 0:
        raise ValueError(f"consumption cannot be negative: predicted={predicted}, actual={actual}")
    if savings_basis not in SAVINGS_BASES:
        raise ValueError(f"savings_basis must be one of {SAVINGS_BASES}, got {savings_basis!r}")
    baseline = table.resolve(hour_start)
    warning = predicted > baseline
    if warning:
        basis_value = actual if savings_basis == "actual" else predicted
        saved = max(basis_value - baseline, 0.0)
        return DecisionRecord(hour_start, predicted, baseline, actual, True, baseline, saved)
    return DecisionRecord(hour_start, predicted, baseline, actual, False, None, 0.0)


def run_window(
    predicted: Sequence[float],
    actual: Sequence[float],
    hours: Sequence[datetime],
    table: BaselineTable,
    savings_basis: str = "actual",
) -> tuple[list[DecisionRecord], SavingsReport]:
    """Decide every hour of an aligned window and total the outcome."""
    if not (len(predicted) == len(actual) == len(hours)):
        raise ValueError(
            f"window length mismatch: {len(predicted)} predictions, "
            f"{len(actual)} actuals, {len(hours)} hours"
        )
    records = [
        decide(float(p), float(a), h, table, savings_basis)
        for p, a, h in zip(predicted, actual, hours)
    ]
    report = SavingsReport(
        window_hours=len(records),
        warning_count=sum(1 for r in records if r.warning),
        total_saved=sum(r.saved for r in records),
    )
    return records, report


def cost_saving(saved_total: float, tariff: float) -> float:
    """Cost of the saved energy at the tariff, rounded half-up to cents."""
    if saved_total < 0:
        raise ValueError(f"saved_total cannot be negative: {saved_total}")
    if tariff <= 0:
        raise ValueError(f"tariff must be positive: {tariff}")
    amount = Decimal(str(saved_total)) * Decimal(str(tariff))
    return float(amount.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))
