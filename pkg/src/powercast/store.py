"""Plain-file persistence for hourly series, model checkpoints and baselines.

Every artifact is a self-describing text file: a kind/version line, a
sha256 of the payload, then the payload itself.  Floats are written with
``repr`` so loading reproduces them bit for bit.  Writes go through a
temporary file and ``os.replace``, so a crash can never leave a loadable
half-written artifact.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, fields
from datetime import datetime
from pathlib import Path

import numpy as np

from .decision import BaselineTable, GroupMean
from .model import PARAM_NAMES, ModelConfig, ModelState, _param_shapes
from .preprocess import FeatureRange, HourlyRecord, NormalizationParams

FORMAT_VERSION = 1

HOURLY_COLUMNS = (
    "hour_start",
    "global_active_power",
    "global_reactive_power",
    "voltage",
    "global_intensity",
    "sub_metering_1",
    "sub_metering_2",
    "sub_metering_3",
    "minute_count",
)


class StoreError(ValueError):
    """A missing, corrupt or incompatible artifact file."""


@dataclass(frozen=True)
class StoreLayout:
    """Canonical artifact paths under one output root."""

    root: Path

    @property
    def hourly(self) -> Path:
        return self.root / "hourly.csv"

    @property
    def checkpoint(self) -> Path:
        return self.root / "checkpoint.txt"

    @property
    def baseline(self) -> Path:
        return self.root / "baseline.txt"

    @property
    def manifest(self) -> Path:
        return self.root / "manifest.txt"

    @property
    def reports_dir(self) -> Path:
        return self.root / "reports"

    @property
    def figures_dir(self) -> Path:
        return self.root / "figures"

    def ensure(self) -> "StoreLayout":
        self.reports_dir.mkdir(parents=True, exist_ok=True)
        self.figures_dir.mkdir(parents=True, exist_ok=True)
        return self


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def file_digest(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_artifact(path: str | Path, kind: str, payload: str) -> None:
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()
    write_atomic(path, f"# powercast {kind} v{FORMAT_VERSION}\n# sha256: {digest}\n{payload}")


def read_artifact(path: str | Path, kind: str) -> str:
    path = Path(path)
    if not path.exists():
        raise StoreError(f"artifact not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        head, digest_line, payload = text.split("\n", 2)
    except ValueError:
        raise StoreError(f"{path}: not a powercast artifact") from None
    if head != f"# powercast {kind} v{FORMAT_VERSION}":
        raise StoreError(f"{path}: expected '{kind}' v{FORMAT_VERSION} artifact, got {head!r}")
    expected = digest_line.removeprefix("# sha256: ")
    actual = hashlib.sha256(payload.encode("utf-8")).hexdigest()
    if actual != expected:
        raise StoreError(f"{path}: digest mismatch, file is corrupt")
    return payload


def _fmt(value: float) -> str:
    return repr(float(value))


# -- hourly series ----------------------------------------------------------

def save_hourly(series: list[HourlyRecord], path: str | Path) -> None:
    lines = [",".join(HOURLY_COLUMNS)]
    for r in series:
        lines.append(
            ",".join(
                (
                    r.hour_start.isoformat(),
                    _fmt(r.global_active_power),
                    _fmt(r.global_reactive_power),
                    _fmt(r.voltage),
                    _fmt(r.global_intensity),
                    _fmt(r.sub_metering_1),
                    _fmt(r.sub_metering_2),
                    _fmt(r.sub_metering_3),
                    str(r.minute_count),
                )
            )
        )
    write_artifact(path, "hourly-series", "\n".join(lines) + "\n")


def load_hourly(path: str | Path) -> list[HourlyRecord]:
    payload = read_artifact(path, "hourly-series")
    lines = payload.splitlines()
    if not lines or lines[0] != ",".join(HOURLY_COLUMNS):
        raise StoreError(f"{path}: unexpected hourly column header")
    series = []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(HOURLY_COLUMNS):
            raise StoreError(f"{path}: malformed hourly row {line!r}")
        series.append(
            HourlyRecord(
                hour_start=datetime.fromisoformat(parts[0]),
                global_active_power=float(parts[1]),
                global_reactive_power=float(parts[2]),
                voltage=float(parts[3]),
                global_intensity=float(parts[4]),
                sub_metering_1=float(parts[5]),
                sub_metering_2=float(parts[6]),
                sub_metering_3=float(parts[7]),
                minute_count=int(parts[8]),
            )
        )
    return series


# -- model checkpoint -------------------------------------------------------

def _tensor_lines(name: str, tensor: np.ndarray) -> list[str]:
    dims = " ".join(str(d) for d in tensor.shape)
    lines = [f"[tensor {name} {dims}]"]
    rows = tensor if tensor.ndim == 2 else tensor[np.newaxis, :]
    for row in rows:
        lines.append(" ".join(_fmt(v) for v in row))
    return lines


def save_checkpoint(state: ModelState, norm: NormalizationParams, path: str | Path) -> None:
    lines = ["[config]"]
    for f in fields(ModelConfig):
        value = getattr(state.config, f.name)
        lines.append(f"{f.name} = {_fmt(value) if f.type == 'float' else value}")
    lines.append("[normalization]")
    lines.append(f"fitted_on = {norm.fitted_on}")
    for feature in sorted(norm.ranges):
        r = norm.ranges[feature]
        lines.append(f"range {feature} {_fmt(r.minimum)} {_fmt(r.maximum)}")
    lines.append("[state]")
    lines.append(f"step = {state.step}")
    for prefix, group in (("param", state.params), ("adam_m", state.adam_m), ("adam_v", state.adam_v)):
        for name in PARAM_NAMES:
            lines.extend(_tensor_lines(f"{prefix}:{name}", group[name]))
    write_artifact(path, "checkpoint", "\n".join(lines) + "\n")


def load_checkpoint(path: str | Path) -> tuple[ModelState, NormalizationParams]:
    payload = read_artifact(path, "checkpoint")
    lines = payload.splitlines()
    pos = 0

    def expect(line: str) -> None:
        nonlocal pos
        if pos >= len(lines) or lines[pos] != line:
            got = lines[pos] if pos < len(lines) else "<eof>"
            raise StoreError(f"{path}: expected {line!r}, got {got!r}")
        pos += 1

    expect("[config]")
    config_kwargs: dict = {}
    field_types = {f.name: f.type for f in fields(ModelConfig)}
    while pos < len(lines) and not lines[pos].startswith("["):
        key, _, raw = lines[pos].partition(" = ")
        if key not in field_types:
            raise StoreError(f"{path}: unknown config key {key!r}")
        config_kwargs[key] = float(raw) if field_types[key] == "float" else int(raw)
        pos += 1
    try:
        config = ModelConfig(**config_kwargs)
    except (TypeError, ValueError) as exc:
        raise StoreError(f"{path}: bad config section: {exc}") from exc

    expect("[normalization]")
    fitted_on = "train"
    ranges: dict[str, FeatureRange] = {}
    while pos < len(lines) and not lines[pos].startswith("["):
        line = lines[pos]
        if line.startswith("fitted_on = "):
            fitted_on = line.removeprefix("fitted_on = ")
        elif line.startswith("range "):
            _, feature, lo, hi = line.split(" ")
            ranges[feature] = FeatureRange(minimum=float(lo), maximum=float(hi))
        else:
            raise StoreError(f"{path}: bad normalization line {line!r}")
        pos += 1
    norm = NormalizationParams(ranges=ranges, fitted_on=fitted_on)

    expect("[state]")
    if pos >= len(lines) or not lines[pos].startswith("step = "):
        raise StoreError(f"{path}: missing step counter")
    step = int(lines[pos].removeprefix("step = "))
    pos += 1

    shapes = _param_shapes(config)
    groups: dict[str, dict[str, np.ndarray]] = {"param": {}, "adam_m": {}, "adam_v": {}}
    while pos < len(lines):
        header = lines[pos]
        if not (header.startswith("[tensor ") and header.endswith("]")):
            raise StoreError(f"{path}: expected tensor header, got {header!r}")
        pos += 1
        name_part, *dim_parts = header[len("[tensor ") : -1].split(" ")
        prefix, _, name = name_part.partition(":")
        if prefix not in groups or name not in shapes:
            raise StoreError(f"{path}: unknown tensor {name_part!r}")
        dims = tuple(int(d) for d in dim_parts)
        if dims != shapes[name]:
            raise StoreError(f"{path}: tensor {name_part} has shape {dims}, config implies {shapes[name]}")
        n_rows = dims[0] if len(dims) == 2 else 1
        rows = []
        for _ in range(n_rows):
            if pos >= len(lines):
                raise StoreError(f"{path}: truncated tensor {name_part}")
            rows.append([float(v) for v in lines[pos].split(" ")])
            pos += 1
        try:
            tensor = np.array(rows, dtype=float).reshape(dims)
        except ValueError as exc:
            raise StoreError(f"{path}: tensor {name_part} does not match its declared shape") from exc
        groups[prefix][name] = tensor

    for prefix, group in groups.items():
        if set(group) != set(PARAM_NAMES):
            missing = set(PARAM_NAMES) - set(group)
            raise StoreError(f"{path}: missing {prefix} tensors: {sorted(missing)}")
    state = ModelState(
        config=config,
        params=groups["param"],
        adam_m=groups["adam_m"],
        adam_v=groups["adam_v"],
        step=step,
    )
    return state, norm


# -- baseline table ---------------------------------------------------------

def save_baseline(table: BaselineTable, path: str | Path) -> None:
    lines = [f"overall {_fmt(table.overall.mean)} {table.overall.count}"]
    for h in sorted(table.by_hour):
        g = table.by_hour[h]
        lines.append(f"hour {h} {_fmt(g.mean)} {g.count}")
    for h, w in sorted(table.by_hour_weekday):
        g = table.by_hour_weekday[(h, w)]
        lines.append(f"hourweekday {h} {w} {_fmt(g.mean)} {g.count}")
    for h, m, w in sorted(table.exact):
        g = table.exact[(h, m, w)]
        lines.append(f"exact {h} {m} {w} {_fmt(g.mean)} {g.count}")
    write_artifact(path, "baseline", "\n".join(lines) + "\n")


def load_baseline(path: str | Path) -> BaselineTable:
    payload = read_artifact(path, "baseline")
    overall: GroupMean | None = None
    by_hour: dict[int, GroupMean] = {}
    by_hour_weekday: dict[tuple[int, int], GroupMean] = {}
    exact: dict[tuple[int, int, int], GroupMean] = {}
    for line in payload.splitlines():
        kind, *rest = line.split(" ")
        if kind == "overall":
            overall = GroupMean(float(rest[0]), int(rest[1]))
        elif kind == "hour":
            by_hour[int(rest[0])] = GroupMean(float(rest[1]), int(rest[2]))
        elif kind == "hourweekday":
            by_hour_weekday[(int(rest[0]), int(rest[1]))] = GroupMean(float(rest[2]), int(rest[3]))
        elif kind == "exact":
            exact[(int(rest[0]), int(rest[1]), int(rest[2]))] = GroupMean(float(rest[3]), int(rest[4]))
        else:
            raise StoreError(f"{path}: unknown baseline line kind {kind!r}")
    if overall is None:
        raise StoreError(f"{path}: baseline file has no overall mean")
    return BaselineTable(exact=exact, by_hour_weekday=by_hour_weekday, by_hour=by_hour, overall=overall)
