"""Matplotlib renders of the report data, written straight to image files."""

from __future__ import annotations

from datetime import datetime
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .decision import DecisionRecord
from .model import TrainReport

# fixed metadata so repeated runs produce identical image bytes
_SAVE_KWARGS = {"dpi": 120, "metadata": {"Software": "powercast"}}


def plot_loss_curve(report: TrainReport, path: Path) -> None:
    epochs = np.arange(1, len(report.train_loss) + 1)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(epochs, report.train_loss, label="train")
    ax.plot(epochs, report.test_loss, label="test")
    ax.set_xlabel("epoch")
    ax.set_ylabel("MSE (normalized)")
    ax.set_title("Train vs. test loss")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def plot_predictions(
    hours: list[datetime], actual, predicted, path: Path
) -> None:
    x = np.arange(len(hours))
    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.plot(x, actual, label="actual", linewidth=1.2)
    ax.plot(x, predicted, label="predicted", linewidth=1.2)
    ax.set_xlabel(f"hour in window (from {hours[0].isoformat()})" if hours else "hour in window")
    ax.set_ylabel("hourly active power (summed kW)")
    ax.set_title("Actual vs. predicted consumption")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def plot_warnings(records: list[DecisionRecord], path: Path) -> None:
    """Consumption line with its baseline and red squares on warning hours."""
    x = np.arange(len(records))
    actual = [r.actual for r in records]
    baseline = [r.baseline for r in records]
    flagged = [i for i, r in enumerate(records) if r.warning]
    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.plot(x, actual, label="actual", linewidth=1.2)
    ax.plot(x, baseline, label="historical average", linewidth=1.0, linestyle="--")
    if flagged:
        ax.scatter(
            [x[i] for i in flagged],
            [actual[i] for i in flagged],
            marker="s",
            color="red",
            s=28,
            label="warning",
            zorder=3,
        )
    start = records[0].hour_start.isoformat() if records else ""
    ax.set_xlabel(f"hour in window (from {start})")
    ax.set_ylabel("hourly active power (summed kW)")
    ax.set_title("Warnings over the decision window")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
