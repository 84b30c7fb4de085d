"""End-to-end batch pipeline: meter file in, reports and figures out.

Stages run in order: ingest, impute, resample, split, normalize, train,
predict, baseline, decide, explain, report.  Any stage failure is wrapped
with the stage name so the command line can say where the run died.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import numpy as np

from . import __version__, decision, explain, figures, ingest, model, preprocess, report, store


@dataclass(frozen=True)
class PipelineOptions:
    data: Path
    out: Path
    seed: int = 0
    epochs: int = 20
    hidden: int = 50
    lookback: int = 1
    batch: int = 32
    lr: float = 0.001
    train_fraction: float = 0.5
    tariff: float = 0.182
    window: int = 200
    window_offset: int = 0
    savings_basis: str = "actual"


@dataclass
class PipelineResult:
    layout: store.StoreLayout
    hourly_count: int
    train_report: model.TrainReport
    savings: decision.SavingsReport
    cost_saved: float
    correlation_power_intensity: float


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for the CLI."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def model_config(opts: PipelineOptions) -> model.ModelConfig:
    return model.ModelConfig(
        input_size=1,
        hidden_size=opts.hidden,
        lookback=opts.lookback,
        epochs=opts.epochs,
        batch_size=opts.batch,
        learning_rate=opts.lr,
        seed=opts.seed,
    )


def decision_window(
    state: model.ModelState,
    norm: preprocess.NormalizationParams,
    table: decision.BaselineTable,
    test: list[preprocess.HourlyRecord],
    opts: PipelineOptions,
) -> tuple[list[decision.DecisionRecord], decision.SavingsReport, float, list, np.ndarray, np.ndarray]:
    """Predict the test slice and decide the requested window of hours.

    Returns the decision records and savings, plus the window's hours,
    actuals and de-normalized predictions for the prediction report.
    """
    scaled_test = preprocess.scale(
        np.array([r.global_active_power for r in test]), norm
    )
    predictions, _ = model.predict_series(state, scaled_test)
    predicted_power = preprocess.inverse_scale(predictions, norm)
    # prediction i targets test[i + lookback]
    lo = opts.window_offset
    hi = min(lo + opts.window, len(predictions))
    hours = [r.hour_start for r in test[opts.lookback + lo : opts.lookback + hi]]
    actual_power = np.array(
        [r.global_active_power for r in test[opts.lookback + lo : opts.lookback + hi]]
    )
    window_predictions = np.clip(predicted_power[lo:hi], 0.0, None)
    records, savings = decision.run_window(
        window_predictions, actual_power, hours, table, opts.savings_basis
    )
    cost = decision.cost_saving(savings.total_saved, opts.tariff)
    return records, savings, cost, hours, actual_power, window_predictions


def write_manifest(
    layout: store.StoreLayout, opts: PipelineOptions, command: str, started: datetime
) -> None:
    lines = [
        f"command = {command}",
        f"version = {__version__}",
        f"data = {opts.data}",
        f"data_sha256 = {store.file_digest(opts.data)}",
        f"out = {opts.out}",
        f"seed = {opts.seed}",
        f"epochs = {opts.epochs}",
        f"hidden = {opts.hidden}",
        f"lookback = {opts.lookback}",
        f"batch = {opts.batch}",
        f"lr = {opts.lr!r}",
        f"train_fraction = {opts.train_fraction!r}",
        f"tariff = {opts.tariff!r}",
        f"window = {opts.window}",
        f"window_offset = {opts.window_offset}",
        f"savings_basis = {opts.savings_basis}",
    ]
    for name in ("hourly", "checkpoint", "baseline"):
        path = getattr(layout, name)
        lines.append(f"artifact_{name} = {path}")
        lines.append(f"artifact_{name}_sha256 = {store.file_digest(path)}")
    lines.append(f"started = {started.isoformat()}")
    lines.append(f"finished = {datetime.now().isoformat()}")
    store.write_atomic(layout.manifest, "\n".join(lines) + "\n")


def run_pipeline(opts: PipelineOptions, log=print) -> PipelineResult:
    started = datetime.now()
    layout = store.StoreLayout(Path(opts.out)).ensure()

    log(f"ingest: {opts.data}")
    records, summary = _stage("ingest", ingest.load_dataset, opts.data)
    log(f"  {summary.row_count} rows, {summary.missing_total} missing cells")

    records, imputation = _stage("impute", preprocess.impute_missing, records)
    hourly = _stage("resample", preprocess.resample_hourly, records)
    del records
    log(f"resample: {len(hourly)} hourly records")

    train_set, test_set, split = _stage(
        "split", preprocess.split_chronological, hourly, opts.train_fraction
    )
    norm = _stage("normalize", preprocess.fit_minmax, train_set, ("global_active_power",))
    scaled_train = preprocess.scale(
        np.array([r.global_active_power for r in train_set]), norm
    )
    scaled_test = preprocess.scale(
        np.array([r.global_active_power for r in test_set]), norm
    )

    config = model_config(opts)
    log(f"train: {config.epochs} epochs on {len(train_set)} train hours")
    state, train_report = _stage("train", model.train, scaled_train, scaled_test, config)
    log(
        f"  final train MSE {train_report.train_loss[-1]:.6f}, "
        f"test MSE {train_report.test_loss[-1]:.6f}"
    )

    table = _stage("baseline", decision.build_baseline, train_set)
    records_window, savings, cost, hours, actual_power, predicted_power = _stage(
        "decide", decision_window, state, norm, table, test_set, opts
    )
    log(
        f"decide: {savings.warning_count} warnings over {savings.window_hours} hours, "
        f"saved {savings.total_saved:.1f} kW (EUR {cost:.2f})"
    )

    data_annotation = _stage("explain", explain.annotate_data, hourly)
    test_predictions, test_actuals = model.predict_series(state, scaled_test)
    windows, _ = model.make_sequences(scaled_test, opts.lookback)
    model_annotation = _stage(
        "explain",
        explain.annotate_model,
        train_report,
        test_predictions,
        test_actuals,
        np.abs(windows).mean(axis=1),
    )

    def write_outputs():
        store.save_hourly(hourly, layout.hourly)
        store.save_checkpoint(state, norm, layout.checkpoint)
        store.save_baseline(table, layout.baseline)
        reports = layout.reports_dir
        report.write_ingest_summary(summary, imputation, reports / "ingest.csv")
        report.write_loss_curve(train_report, reports / "loss_curve.csv")
        report.write_predictions(hours, actual_power, predicted_power, reports / "predictions.csv")
        report.write_decisions(
            records_window, savings, cost, opts.tariff, opts.savings_basis, reports / "decisions.csv"
        )
        report.write_correlation(data_annotation, reports / "correlation.csv")
        report.write_data_annotation(data_annotation, reports / "data_annotation.csv")
        report.write_histograms(data_annotation, reports / "histograms.csv")
        report.write_model_annotation(model_annotation, reports / "model_annotation.csv")
        figs = layout.figures_dir
        figures.plot_loss_curve(train_report, figs / "loss_curve.png")
        figures.plot_predictions(hours, actual_power, predicted_power, figs / "predictions.png")
        figures.plot_warnings(records_window, figs / "warnings.png")

    _stage("report", write_outputs)
    _stage("report", write_manifest, layout, opts, "pipeline", started)
    log(f"report: artifacts under {layout.root}")

    return PipelineResult(
        layout=layout,
        hourly_count=len(hourly),
        train_report=train_report,
        savings=savings,
        cost_saved=cost,
        correlation_power_intensity=data_annotation.correlation_between(
            "global_active_power", "global_intensity"
        ),
    )


def run_report(opts: PipelineOptions, log=print) -> tuple[list[decision.DecisionRecord], decision.SavingsReport, float]:
    """Rebuild the decision/savings report from stored artifacts only."""
    layout = store.StoreLayout(Path(opts.out))
    for required in (layout.hourly, layout.checkpoint, layout.baseline):
        if not required.exists():
            raise StageError("load", FileNotFoundError(f"missing artifact {required}"))
    hourly = _stage("load", store.load_hourly, layout.hourly)
    state, norm = _stage("load", store.load_checkpoint, layout.checkpoint)
    table = _stage("load", store.load_baseline, layout.baseline)
    _, test_set, _ = _stage("split", preprocess.split_chronological, hourly, opts.train_fraction)
    records, savings, cost, hours, actual_power, predicted_power = _stage(
        "decide", decision_window, state, norm, table, test_set, opts
    )
    layout.ensure()
    _stage(
        "report",
        report.write_decisions,
        records,
        savings,
        cost,
        opts.tariff,
        opts.savings_basis,
        layout.reports_dir / "decisions.csv",
    )
    _stage(
        "report", report.write_predictions, hours, actual_power, predicted_power,
        layout.reports_dir / "predictions.csv",
    )
    _stage("report", figures.plot_warnings, records, layout.figures_dir / "warnings.png")
    _stage(
        "report", figures.plot_predictions, hours, actual_power, predicted_power,
        layout.figures_dir / "predictions.png",
    )
    log(
        f"report: {savings.warning_count} warnings over {savings.window_hours} hours, "
        f"saved {savings.total_saved:.1f} kW (EUR {cost:.2f})"
    )
    return records, savings, cost
