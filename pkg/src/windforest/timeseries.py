"""Regularly sampled wind-speed series: CSV ingestion, validation and slicing."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np


class IngestError(ValueError):
    """Raised when a CSV file cannot be turned into a valid series."""


@dataclass(frozen=True, eq=False)
class WindSeries:
    """Scalar series on a regular time grid.

    Sample ``k`` sits at ``start_epoch + k * interval_s``; no per-sample
    timestamps are stored. ``values`` is kept as a read-only float64 array.
    """

    start_epoch: int
    interval_s: int
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).ravel()
        if int(self.interval_s) <= 0:
            raise ValueError(f"interval_s must be positive, got {self.interval_s}")
        if values.size < 1:
            raise ValueError("a series needs at least one sample")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValueError(f"non-finite speed at sample {bad}")
        if np.any(values < 0):
            bad = int(np.flatnonzero(values < 0)[0])
            raise ValueError(f"negative speed {values[bad]!r} at sample {bad}")
        values.setflags(write=False)
        object.__setattr__(self, "start_epoch", int(self.start_epoch))
        object.__setattr__(self, "interval_s", int(self.interval_s))
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, WindSeries):
            return NotImplemented
        return (
            self.start_epoch == other.start_epoch
            and self.interval_s == other.interval_s
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def timestamps(self) -> np.ndarray:
        return self.start_epoch + self.interval_s * np.arange(len(self), dtype=np.int64)

    def slice(self, start_index: int, length: int) -> "WindSeries":
        return slice_series(self, start_index, length)


@dataclass
class IngestConfig:
    """How to read a speed CSV.

    ``timestamp_format`` is ``"epoch"``, ``"iso"`` or ``"auto"`` (integers are
    epoch seconds, anything else is parsed as ISO-8601; naive times are UTC).
    ``timestamp_column=None`` picks ``timestamp`` or, failing that, ``epoch_s``.
    """

    interval_s: int = 600
    max_gap: int = 6
    timestamp_format: str = "auto"
    timestamp_column: str | None = None
    speed_column: str = "speed_ms"


@dataclass
class IngestReport:
    rows_read: int = 0
    gaps_filled: int = 0
    rows_rejected: int = 0
    rejections: list[tuple[int, str]] = field(default_factory=list)


def _parse_timestamp(text: str, fmt: str) -> int:
    text = text.strip()
    if fmt in ("epoch", "auto"):
        try:
            return int(text)
        except ValueError:
            if fmt == "epoch":
                raise
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    ts = dt.timestamp()
    if ts != int(ts):
        raise ValueError(f"sub-second timestamp {text!r}")
    return int(ts)


def parse_csv(path, config: IngestConfig | None = None) -> tuple[WindSeries, IngestReport]:
    """Read a ``timestamp,speed_ms`` CSV onto a regular grid.

    Rows that are duplicated, out of order or off the sampling grid are
    rejected and counted. Runs of up to ``config.max_gap`` missing samples are
    filled by linear interpolation; longer gaps raise :class:`IngestError`, as
    do negative or non-finite speeds and unparseable rows.
    """
    config = config or IngestConfig()
    if config.interval_s <= 0:
        raise IngestError(f"interval_s must be positive, got {config.interval_s}")
    if config.max_gap < 0:
        raise IngestError(f"max_gap must be >= 0, got {config.max_gap}")
    if config.timestamp_format not in ("auto", "epoch", "iso"):
        raise IngestError(f"unknown timestamp_format {config.timestamp_format!r}")
    path = Path(path)
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc.strerror or exc}") from exc

    report = IngestReport()
    step = config.interval_s
    values: list[float] = []
    start = last = None
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file") from None
        except (csv.Error, UnicodeDecodeError) as exc:
            raise IngestError(f"{path}: {exc}") from exc
        header = [h.strip().lstrip("﻿") for h in header]
        ts_col = config.timestamp_column
        if ts_col is None:
            ts_col = "timestamp" if "timestamp" in header else "epoch_s"
        for col in (ts_col, config.speed_column):
            if col not in header:
                raise IngestError(f"{path}: missing column {col!r} in header {header}")
        ti, si = header.index(ts_col), header.index(config.speed_column)

        try:
            for row in reader:
                if not row or all(not c.strip() for c in row):
                    continue
                report.rows_read += 1
                rowno = reader.line_num
                try:
                    ts = _parse_timestamp(row[ti], config.timestamp_format)
                    speed = float(row[si])
                except (ValueError, IndexError) as exc:
                    raise IngestError(f"{path}: row {rowno}: cannot parse {row!r} ({exc})") from None
                if not math.isfinite(speed):
                    raise IngestError(f"{path}: row {rowno}: non-finite speed {row[si].strip()!r}")
                if speed < 0:
                    raise IngestError(f"{path}: row {rowno}: negative speed {speed!r}")

                if start is None:
                    start = last = ts
                    values.append(speed)
                    continue
                if ts == last:
                    reason = "duplicate timestamp"
                elif ts < last:
                    reason = "out of order"
                elif (ts - start) % step:
                    reason = "off the sampling grid"
                else:
                    reason = None
                if reason:
                    report.rows_rejected += 1
                    report.rejections.append((rowno, reason))
                    continue
                missing = (ts - last) // step - 1
                if missing > config.max_gap:
                    raise IngestError(
                        f"{path}: row {rowno}: gap of {missing} missing samples exceeds max_gap={config.max_gap}"
                    )
                if missing:
                    prev = values[-1]
                    for k in range(1, missing + 1):
                        values.append(prev + (speed - prev) * k / (missing + 1))
                    report.gaps_filled += missing
                values.append(speed)
                last = ts
        except (csv.Error, UnicodeDecodeError) as exc:
            raise IngestError(f"{path}: {exc}") from exc

    if not values:
        raise IngestError(f"{path}: no valid rows")
    return WindSeries(start, step, np.asarray(values)), report


def write_csv(series: WindSeries, path, timestamp_header: str = "epoch_s") -> None:
    """Write ``epoch_s,speed_ms`` rows; speeds use the shortest round-trip repr."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"{timestamp_header},speed_ms\n")
        for ts, v in zip(series.timestamps().tolist(), series.values.tolist()):
            fh.write(f"{ts},{v!r}\n")


def slice_series(series: WindSeries, start_index: int, length: int) -> WindSeries:
    if start_index < 0 or length < 1 or start_index + length > len(series):
        raise IndexError(
            f"slice [{start_index}, {start_index + length}) out of range for series of length {len(series)}"
        )
    return WindSeries(
        series.start_epoch + start_index * series.interval_s,
        series.interval_s,
        series.values[start_index : start_index + length],
    )
