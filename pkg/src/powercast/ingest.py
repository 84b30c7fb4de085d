"""Streaming parser for the minute-resolution household power meter file.

The file is semicolon-delimited ASCII with a fixed header, dates as
``d/m/yyyy``, times as ``hh:mm:ss`` and ``?`` marking a missing measurement.
Rows are parsed one at a time so memory stays flat apart from the returned
record list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, datetime, time
from pathlib import Path
from typing import Iterator

HEADER = (
    "Date;Time;Global_active_power;Global_reactive_power;Voltage;"
    "Global_intensity;Sub_metering_1;Sub_metering_2;Sub_metering_3"
)

MEASUREMENT_FIELDS = (
    "global_active_power",
    "global_reactive_power",
    "voltage",
    "global_intensity",
    "sub_metering_1",
    "sub_metering_2",
    "sub_metering_3",
)

MISSING_MARKER = "?"


class IngestError(ValueError):
    """A row or file that does not conform to the meter file format."""

    def __init__(self, message: str, row_index: int | None = None, field_name: str | None = None):
        self.row_index = row_index
        self.field_name = field_name
        where = []
        if row_index is not None:
            where.append(f"row {row_index}")
        if field_name is not None:
            where.append(f"field {field_name!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


@dataclass(slots=True)
class MinuteRecord:
    """One meter reading: a minute timestamp plus seven measurements.

    A measurement is ``None`` when the meter reported it missing.  Units:
    kilowatts for the two power figures, volts, amperes, and watt-hours for
    the three sub-meters (kitchen, laundry, water heater + air conditioner).
    """

    timestamp: datetime
    global_active_power: float | None
    global_reactive_power: float | None
    voltage: float | None
    global_intensity: float | None
    sub_metering_1: float | None
    sub_metering_2: float | None
    sub_metering_3: float | None


@dataclass
class IngestSummary:
    """Counts gathered while scanning a meter file."""

    row_count: int = 0
    missing: dict[str, int] = field(default_factory=lambda: {f: 0 for f in MEASUREMENT_FIELDS})

    @property
    def missing_total(self) -> int:
        return sum(self.missing.values())


# Date and time strings repeat heavily (1440 rows per date), so parsed
# components are memoised per load_dataset call via these caches.
def _parse_timestamp(
    date_s: str,
    time_s: str,
    row_index: int,
    date_cache: dict[str, date],
    time_cache: dict[str, time],
) -> datetime:
    d = date_cache.get(date_s)
    if d is None:
        try:
            day_s, month_s, year_s = date_s.split("/")
            d = date(int(year_s), int(month_s), int(day_s))
        except ValueError:
            raise IngestError(f"unparseable date {date_s!r}", row_index, "Date") from None
        date_cache[date_s] = d
    t = time_cache.get(time_s)
    if t is None:
        try:
            hh, mm, ss = time_s.split(":")
            t = time(int(hh), int(mm), int(ss))
        except ValueError:
            raise IngestError(f"unparseable time {time_s!r}", row_index, "Time") from None
        time_cache[time_s] = t
    return datetime.combine(d, t)


def _parse_measurement(raw: str, name: str, row_index: int) -> float | None:
    if raw == MISSING_MARKER:
        return None
    try:
        value = float(raw)
    except ValueError:
        raise IngestError(f"non-numeric measurement {raw!r}", row_index, name) from None
    # float('inf')/float('nan') parse fine but are corrupt readings here
    if not math.isfinite(value):
        raise IngestError(f"non-finite measurement {raw!r}", row_index, name)
    if value < 0:
        raise IngestError(f"negative measurement {raw!r}", row_index, name)
    if name == "voltage" and value == 0:
        raise IngestError("zero voltage reading", row_index, name)
    return value


def parse_minute_record(
    line: str,
    row_index: int,
    _date_cache: dict[str, date] | None = None,
    _time_cache: dict[str, time] | None = None,
) -> MinuteRecord:
    """Parse one data row (header already skipped).

    ``row_index`` is the 1-based ordinal of the data row; it is echoed in any
    raised :class:`IngestError` together with the offending field.
    """
    parts = line.rstrip("\r\n").split(";")
    if len(parts) != 9:
        raise IngestError(f"wrong field count: expected 9, got {len(parts)}", row_index)
    ts = _parse_timestamp(
        parts[0],
        parts[1],
        row_index,
        _date_cache if _date_cache is not None else {},
        _time_cache if _time_cache is not None else {},
    )
    values = [_parse_measurement(parts[i + 2], name, row_index) for i, name in enumerate(MEASUREMENT_FIELDS)]
    return MinuteRecord(ts, *values)


def iter_minute_records(path: str | Path) -> Iterator[tuple[MinuteRecord, int]]:
    """Stream ``(record, row_index)`` pairs from a meter file.

    Raises :class:`IngestError` for an unreadable file, a header mismatch, or
    the first malformed row.
    """
    path = Path(path)
    try:
        handle = open(path, "r", encoding="ascii", newline="")
    except OSError as exc:
        raise IngestError(f"cannot open {path}: {exc.strerror}") from exc
    with handle:
        header = handle.readline().rstrip("\r\n")
        if header != HEADER:
            raise IngestError(f"header mismatch: got {header[:120]!r}")
        date_cache: dict[str, date] = {}
        time_cache: dict[str, time] = {}
        for row_index, line in enumerate(handle, start=1):
            yield parse_minute_record(line, row_index, date_cache, time_cache), row_index


def load_dataset(path: str | Path) -> tuple[list[MinuteRecord], IngestSummary]:
    """Read a whole meter file in file order and tally missing values."""
    records: list[MinuteRecord] = []
    summary = IngestSummary()
    missing = summary.missing
    for record, _ in iter_minute_records(path):
        records.append(record)
        for name in MEASUREMENT_FIELDS:
            if getattr(record, name) is None:
                missing[name] += 1
    summary.row_count = len(records)
    return records, summary
