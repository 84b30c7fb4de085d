"""Delimited report files: a header row, data rows, then an aggregate block.

Each report ends with ``# aggregate:`` lines so the headline numbers ride
along with the plot-ready rows.  Values are written with ``repr`` so tests
and downstream tools can recompute aggregates exactly; money is fixed to
cents.
"""

from __future__ import annotations

from datetime import datetime
from pathlib import Path

import numpy as np

from .decision import DecisionRecord, SavingsReport
from .explain import DataAnnotation, ModelAnnotation
from .ingest import MEASUREMENT_FIELDS, IngestSummary
from .model import TrainReport
from .preprocess import ImputationReport
from .store import write_atomic

AGGREGATE_PREFIX = "# aggregate:"


def _fmt(value: float) -> str:
    return repr(float(value))


def _write(path: Path, header: str, rows: list[str], aggregates: dict[str, object]) -> None:
    lines = [header, *rows]
    for key, value in aggregates.items():
        lines.append(f"{AGGREGATE_PREFIX} {key}={value}")
    write_atomic(path, "\n".join(lines) + "\n")


def write_loss_curve(report: TrainReport, path: Path) -> None:
    rows = [
        f"{epoch},{_fmt(tr)},{_fmt(te)}"
        for epoch, (tr, te) in enumerate(zip(report.train_loss, report.test_loss), start=1)
    ]
    _write(
        path,
        "epoch,train_mse,test_mse",
        rows,
        {
            "epochs": len(report.train_loss),
            "final_train_mse": _fmt(report.train_loss[-1]),
            "final_test_mse": _fmt(report.test_loss[-1]),
        },
    )


def write_predictions(
    hours: list[datetime], actual: np.ndarray, predicted: np.ndarray, path: Path
) -> None:
    rows = [
        f"{h.isoformat()},{_fmt(a)},{_fmt(p)}"
        for h, a, p in zip(hours, actual, predicted)
    ]
    mae = float(np.mean(np.abs(np.asarray(actual) - np.asarray(predicted)))) if rows else 0.0
    _write(
        path,
        "hour_start,actual,predicted",
        rows,
        {"hours": len(rows), "mean_abs_error": _fmt(mae)},
    )


def write_decisions(
    records: list[DecisionRecord],
    savings: SavingsReport,
    cost_saved: float,
    tariff: float,
    savings_basis: str,
    path: Path,
) -> None:
    rows = []
    for r in records:
        cap = _fmt(r.cap) if r.cap is not None else ""
        rows.append(
            f"{r.hour_start.isoformat()},{_fmt(r.predicted)},{_fmt(r.baseline)},"
            f"{_fmt(r.actual)},{'true' if r.warning else 'false'},{cap},{_fmt(r.saved)}"
        )
    _write(
        path,
        "hour_start,predicted,baseline,actual,warning,cap,saved",
        rows,
        {
            "hours": savings.window_hours,
            "warnings": savings.warning_count,
            "total_saved_kw": _fmt(savings.total_saved),
            "savings_basis": savings_basis,
            "tariff_eur_per_kwh": _fmt(tariff),
            "cost_saved_eur": f"{cost_saved:.2f}",
        },
    )


def read_decisions(path: Path) -> list[DecisionRecord]:
    """Parse a decisions report back into records (exact float round trip)."""
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines()[1:]:
        if line.startswith("#"):
            continue
        hour, predicted, baseline, actual, warning, cap, saved = line.split(",")
        records.append(
            DecisionRecord(
                hour_start=datetime.fromisoformat(hour),
                predicted=float(predicted),
                baseline=float(baseline),
                actual=float(actual),
                warning=warning == "true",
                cap=float(cap) if cap else None,
                saved=float(saved),
            )
        )
    return records


def write_correlation(annotation: DataAnnotation, path: Path) -> None:
    names = annotation.features
    rows = [
        name + "," + ",".join(_fmt(v) for v in annotation.correlation[i])
        for i, name in enumerate(names)
    ]
    _write(
        path,
        "feature," + ",".join(names),
        rows,
        {
            "r_active_power_intensity": _fmt(
                annotation.correlation_between("global_active_power", "global_intensity")
            ),
            "degenerate_features": ";".join(annotation.degenerate) or "none",
        },
    )


def write_data_annotation(annotation: DataAnnotation, path: Path) -> None:
    rows = []
    for name in annotation.features:
        s = annotation.stats[name]
        rows.append(
            f"{name},{_fmt(s.minimum)},{_fmt(s.maximum)},{_fmt(s.mean)},{_fmt(s.std)},"
            f"{_fmt(s.q25)},{_fmt(s.median)},{_fmt(s.q75)},{s.outlier_count}"
        )
    _write(
        path,
        "feature,min,max,mean,std,q25,median,q75,outliers_3sigma",
        rows,
        {"records": annotation.record_count},
    )


def write_histograms(annotation: DataAnnotation, path: Path) -> None:
    rows = []
    for name in annotation.features:
        hist = annotation.histograms[name]
        for lo, hi, count in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
            rows.append(f"{name},{_fmt(lo)},{_fmt(hi)},{count}")
    _write(path, "feature,bin_low,bin_high,count", rows, {"records": annotation.record_count})


def write_model_annotation(annotation: ModelAnnotation, path: Path) -> None:
    rows = [
        f"residual_mean,{_fmt(annotation.residual_mean)}",
        f"residual_std,{_fmt(annotation.residual_std)}",
        f"max_abs_error,{_fmt(annotation.max_abs_error)}",
        f"residual_band_5pct,{_fmt(annotation.band_low)}",
        f"residual_band_95pct,{_fmt(annotation.band_high)}",
        f"outlier_sensitivity,{_fmt(annotation.outlier_sensitivity)}",
    ]
    _write(
        path,
        "statistic,value",
        rows,
        {
            "final_train_mse": _fmt(annotation.train_loss[-1]),
            "final_test_mse": _fmt(annotation.test_loss[-1]),
        },
    )


def write_ingest_summary(
    summary: IngestSummary, imputation: ImputationReport, path: Path
) -> None:
    rows = [
        f"{name},{summary.missing[name]},{imputation.imputed[name]}"
        for name in MEASUREMENT_FIELDS
    ]
    _write(
        path,
        "column,missing,imputed",
        rows,
        {
            "rows": summary.row_count,
            "missing_total": summary.missing_total,
            "imputed_total": imputation.total,
            # gaps are filled by neighbour averaging; no outlier rule is applied
            "outlier_filtering": "none",
        },
    )
