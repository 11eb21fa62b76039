"""Panel loading, validation, normalization and plot stacking.

CSV contract: UTF-8, comma separated, header ``date,<id1>,...,<idN>``, one
row per day. The date column holds either ISO-8601 dates (``2020-01-31``) or
integer day indices. Decimal point is ``.``; no thousands separators.
Empty cells and ``nan``/``na``/``null`` are missing values.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import OrderingError, ParseError, ValidationError

NORMALIZE_METHODS = ("minmax", "zscore", "none")
MISSING_POLICIES = ("reject", "forward-fill")
_MISSING_TOKENS = {"", "nan", "na", "n/a", "null", "none"}


@dataclass(frozen=True)
class IngestConfig:
    date_column: str = "date"
    missing: str = "reject"
    delimiter: str = ","

    def __post_init__(self):
        if self.missing not in MISSING_POLICIES:
            raise ValidationError(
                f"missing policy must be one of {MISSING_POLICIES}, got {self.missing!r}"
            )


@dataclass(frozen=True, eq=False)
class Panel:
    """N series by T observations on a uniform day grid.

    ``values[i]`` is the series named ``series_ids[i]``; ``times`` are integer
    day indices (proleptic ordinals when the source used ISO dates, see
    ``iso_dates``). Arrays are made read-only on construction.
    """

    series_ids: tuple
    times: np.ndarray
    values: np.ndarray
    dt: int = 1
    iso_dates: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = tuple(str(s) for s in self.series_ids)
        times = np.array(self.times, dtype=np.int64)
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[None, :]
        if values.ndim != 2:
            raise ValidationError("panel values must be a 2-D array (series x time)")
        n, t = values.shape
        if len(ids) != n:
            raise ValidationError(f"{len(ids)} series ids for {n} rows")
        if len(set(ids)) != n:
            raise ValidationError("series ids must be unique")
        if t < 2:
            raise ValidationError(f"a panel needs at least 2 observations, got {t}")
        if times.shape != (t,):
            raise ValidationError(f"{times.size} times for {t} columns")
        if int(self.dt) <= 0:
            raise ValidationError("dt must be a positive number of days")
        steps = np.diff(times)
        if np.any(steps != int(self.dt)):
            raise OrderingError(f"times must be strictly increasing with constant step {self.dt}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("panel values must be finite")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "series_ids", ids)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dt", int(self.dt))

    @property
    def n_series(self) -> int:
        return self.values.shape[0]

    @property
    def n_times(self) -> int:
        return self.values.shape[1]

    def series(self, series_id) -> np.ndarray:
        return self.values[self.series_ids.index(str(series_id))]

    def with_values(self, values) -> "Panel":
        return Panel(self.series_ids, self.times, values, self.dt, self.iso_dates, dict(self.meta))

    def select(self, series_ids: Iterable) -> "Panel":
        ids = [str(s) for s in series_ids]
        missing = [s for s in ids if s not in self.series_ids]
        if missing:
            raise ValidationError(f"unknown series ids: {missing}")
        rows = [self.series_ids.index(s) for s in ids]
        return Panel(ids, self.times, self.values[rows], self.dt, self.iso_dates, dict(self.meta))

    def time_labels(self) -> list:
        if self.iso_dates:
            return [_dt.date.fromordinal(int(t)).isoformat() for t in self.times]
        return [str(int(t)) for t in self.times]

    def equals(self, other: "Panel") -> bool:
        return (
            self.series_ids == other.series_ids
            and self.dt == other.dt
            and self.iso_dates == other.iso_dates
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values)
        )


def _parse_time(token: str, line: int) -> tuple[int, bool]:
    token = token.strip()
    try:
        return int(token), False
    except ValueError:
        pass
    try:
        return _dt.date.fromisoformat(token).toordinal(), True
    except ValueError:
        raise ParseError(f"cannot parse date/index {token!r}", line) from None


def _parse_value(token: str, line: int) -> float:
    token = token.strip()
    if token.lower() in _MISSING_TOKENS:
        return math.nan
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"cannot parse number {token!r}", line) from None


def load_panel(source, config: IngestConfig | None = None) -> Panel:
    """Read a panel from a delimited text stream, a path, or a string of CSV text.

    Raises
    ------
    ParseError
        Ragged rows or unparseable cells; the message carries the line number.
    OrderingError
        Dates not strictly increasing or not evenly spaced (gaps).
    ValidationError
        Missing / non-finite cells under ``missing="reject"``, or leading
        missing cells that forward-fill cannot repair.
    """
    config = config or IngestConfig()
    if isinstance(source, os.PathLike) or (isinstance(source, str) and "\n" not in source):
        try:
            fh = open(source, newline="", encoding="utf-8")
        except OSError as exc:
            raise ValidationError(f"cannot read panel {os.fspath(source)!r}: {exc.strerror or exc}") from None
        with fh:
            return load_panel(fh, config)
    if isinstance(source, str):
        source = io.StringIO(source)

    reader = csv.reader(source, delimiter=config.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input", 1) from None
    header = [h.strip() for h in header]
    if header and header[0].startswith("﻿"):
        header[0] = header[0][1:]
    if config.date_column not in header:
        raise ParseError(f"date column {config.date_column!r} not in header", 1)
    date_idx = header.index(config.date_column)
    value_idx = [i for i in range(len(header)) if i != date_idx]
    ids = [header[i] for i in value_idx]
    if not ids:
        raise ParseError("header names no series", 1)

    times, rows, kinds = [], [], set()
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", line)
        t, iso = _parse_time(row[date_idx], line)
        kinds.add(iso)
        times.append((t, line))
        rows.append([_parse_value(row[i], line) for i in value_idx])
    if len(kinds) > 1:
        raise ParseError("date column mixes ISO dates and integer indices")
    if len(times) < 2:
        raise ValidationError(f"a panel needs at least 2 rows, got {len(times)}")

    t_values = np.array([t for t, _ in times], dtype=np.int64)
    steps = np.diff(t_values)
    for k, step in enumerate(steps):
        if step <= 0:
            raise OrderingError(f"line {times[k + 1][1]}: dates not strictly increasing")
    dt = int(steps[0])
    for k, step in enumerate(steps):
        if step != dt:
            raise OrderingError(
                f"line {times[k + 1][1]}: spacing {int(step)} differs from {dt} (gap in the day grid?)"
            )

    values = np.array(rows, dtype=np.float64).T
    bad = ~np.isfinite(values)
    if bad.any():
        if config.missing == "reject":
            i, j = np.argwhere(bad)[0]
            raise ValidationError(
                f"line {times[j][1]}: non-finite value in series {ids[i]!r} (missing policy 'reject')"
            )
        values = _forward_fill(values, ids)
    return Panel(ids, t_values, values, dt, iso_dates=kinds == {True})


def _forward_fill(values: np.ndarray, ids: Sequence[str]) -> np.ndarray:
    out = values.copy()
    for i, row in enumerate(out):
        if not np.isfinite(row[0]):
            raise ValidationError(f"series {ids[i]!r} starts with a missing value; cannot forward-fill")
        for j in range(1, row.size):
            if not np.isfinite(row[j]):
                row[j] = row[j - 1]
    return out


def write_panel(panel: Panel, stream: TextIO, date_column: str = "date", precision: int | None = None):
    """Write ``panel`` in the CSV contract.

    With ``precision=None`` floats are written with ``repr`` (shortest
    round-trip form), so reloading is bit-identical.
    """
    fmt = repr if precision is None else (lambda v: f"{v:.{precision}f}")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([date_column, *panel.series_ids])
    for label, col in zip(panel.time_labels(), panel.values.T):
        writer.writerow([label, *(fmt(float(v)) for v in col)])


def panel_to_csv(panel: Panel, **kwargs) -> str:
    buf = io.StringIO()
    write_panel(panel, buf, **kwargs)
    return buf.getvalue()


def normalize(panel: Panel, method: str = "minmax") -> Panel:
    """Per-series rescaling.

    ``minmax`` maps each series onto [0, 1]; ``zscore`` centres and divides by
    the population standard deviation; ``none`` returns the panel unchanged.
    Constant series become all zeros under both minmax and zscore.
    """
    if method not in NORMALIZE_METHODS:
        raise ValidationError(f"normalize method must be one of {NORMALIZE_METHODS}, got {method!r}")
    if method == "none":
        return panel
    x = panel.values
    out = np.zeros_like(x)
    for i, row in enumerate(x):
        lo, hi = row.min(), row.max()
        if not hi > lo:
            continue
        if method == "minmax":
            out[i] = (row - lo) / (hi - lo)
        else:
            # z-scores are scale free; rescaling first avoids subnormal underflow
            y = row / np.abs(row).max()
            sd = y.std()
            if sd > 0:
                out[i] = (y - y.mean()) / sd
    return panel.with_values(out)


def stack_for_plot(panel: Panel, gap: float) -> Panel:
    """Offset series ``i`` by ``i * gap`` (plot-data export only)."""
    if not gap > 0:
        raise ValidationError(f"gap must be positive, got {gap}")
    offsets = gap * np.arange(panel.n_series, dtype=np.float64)[:, None]
    return panel.with_values(panel.values + offsets)


def unstack(panel: Panel, gap: float) -> Panel:
    if not gap > 0:
        raise ValidationError(f"gap must be positive, got {gap}")
    offsets = gap * np.arange(panel.n_series, dtype=np.float64)[:, None]
    return panel.with_values(panel.values - offsets)
