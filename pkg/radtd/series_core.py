"""
Ingest, validate, rescale and window raw time series.

A TimeSeries holds N observations of d channels. Rescaling statistics are a
separate value (ScalingStats) so the bounds learned on a training prefix can
be frozen and reused at detection time.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import BinaryIO, Iterator, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .config import LABEL_COLUMN_CANDIDATES, TIMESTAMP_FALLBACK, ColumnSchema
from .errors import ConfigError, DataError, InsufficientDataError, LoadError

logger = logging.getLogger("radtd.series_core")

Source = Union[str, Path, bytes, BinaryIO]


@dataclass(frozen=True)
class TimeSeries:
    timestamps: np.ndarray
    values: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = "series"
    columns: Tuple[str, ...] = ("value",)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise DataError(f"values must be (N, d), got shape {values.shape}")
        timestamps = np.asarray(self.timestamps, dtype=np.int64)
        if timestamps.shape != (values.shape[0],):
            raise DataError(
                f"timestamps length {timestamps.shape[0]} != values length {values.shape[0]}"
            )
        if timestamps.size > 1:
            bad = np.flatnonzero(np.diff(timestamps) <= 0)
            if bad.size:
                raise DataError(f"non-monotone timestamps at row {int(bad[0]) + 2}")
        if not np.all(np.isfinite(values)):
            row = int(np.flatnonzero(~np.all(np.isfinite(values), axis=1))[0])
            raise DataError(f"non-finite value at row {row + 1}")
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=bool)
            if labels.shape != (values.shape[0],):
                raise DataError(f"labels length {labels.shape[0]} != values length {values.shape[0]}")
        columns = tuple(self.columns)
        if len(columns) != values.shape[1]:
            columns = tuple(f"v{i + 1}" for i in range(values.shape[1])) if values.shape[1] > 1 else ("value",)
        values.setflags(write=False)
        timestamps.setflags(write=False)
        if labels is not None:
            labels.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "columns", columns)

    @classmethod
    def from_values(
        cls,
        values: Sequence,
        labels: Optional[Sequence] = None,
        name: str = "series",
        columns: Optional[Sequence[str]] = None,
    ) -> "TimeSeries":
        arr = np.asarray(values, dtype=np.float64)
        n = arr.shape[0]
        cols = tuple(columns) if columns is not None else ()
        return cls(np.arange(n, dtype=np.int64), arr, None if labels is None else np.asarray(labels, dtype=bool), name, cols)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def d(self) -> int:
        return int(self.values.shape[1])

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def slice(self, start: int, stop: Optional[int] = None) -> "TimeSeries":
        sl = slice(start, stop)
        labels = None if self.labels is None else self.labels[sl]
        return TimeSeries(self.timestamps[sl], self.values[sl], labels, self.name, self.columns)

    def channel(self, index: int) -> "TimeSeries":
        return TimeSeries(
            self.timestamps,
            self.values[:, index : index + 1],
            self.labels,
            f"{self.name}:{self.columns[index]}",
            (self.columns[index],),
        )


@dataclass(frozen=True)
class ScalingStats:
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "mins", np.asarray(self.mins, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "maxs", np.asarray(self.maxs, dtype=np.float64).reshape(-1))
        if self.mins.shape != self.maxs.shape:
            raise DataError("scaling mins/maxs shape mismatch")

    @property
    def degenerate(self) -> np.ndarray:
        return self.maxs == self.mins

    def to_dict(self) -> dict:
        return {"mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ScalingStats":
        return cls(np.asarray(data["mins"], dtype=np.float64), np.asarray(data["maxs"], dtype=np.float64))


@dataclass(frozen=True)
class WindowPlan:
    w: int
    hop: int = 1

    def __post_init__(self) -> None:
        if self.w < 3:
            raise ConfigError(f"w must be >= 3 (got {self.w})")
        if self.hop < 1:
            raise ConfigError(f"hop must be >= 1 (got {self.hop})")

    def count(self, n: int) -> int:
        if n < self.w:
            return 0
        return 1 + (n - self.w) // self.hop

    def starts(self, n: int) -> np.ndarray:
        return np.arange(self.count(n), dtype=np.int64) * self.hop


@dataclass(frozen=True)
class Subsequence:
    start: int
    values: np.ndarray


@dataclass(frozen=True)
class Windows:
    """T windows of shape (w, d) plus their 0-based start indices."""

    starts: np.ndarray
    segments: np.ndarray
    plan: WindowPlan = field(repr=False, default=WindowPlan(3))

    def __len__(self) -> int:
        return int(self.starts.shape[0])

    def __iter__(self) -> Iterator[Subsequence]:
        for start, seg in zip(self.starts, self.segments):
            yield Subsequence(int(start), seg)


# ----------------------------------------------------------------------------
# loading
# ----------------------------------------------------------------------------

def _read_frame(source: Source) -> pd.DataFrame:
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise FileNotFoundError(f"Missing input: {path.resolve()}")
        handle: Union[Path, io.BytesIO, BinaryIO] = path
    elif isinstance(source, bytes):
        handle = io.BytesIO(source)
    else:
        handle = source
    try:
        return pd.read_csv(handle, dtype=str, keep_default_na=False, encoding="utf-8", on_bad_lines="error")
    except pd.errors.ParserError as exc:
        raise LoadError(f"malformed CSV: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise LoadError("empty CSV (header row required)") from exc
    except UnicodeDecodeError as exc:
        raise LoadError(f"input is not UTF-8: {exc}") from exc


def _parse_timestamps(raw: pd.Series, column: str) -> np.ndarray:
    stripped = raw.str.strip()
    as_int = pd.to_numeric(stripped, errors="coerce")
    if as_int.notna().all() and np.all(np.mod(as_int.to_numpy(dtype=np.float64), 1.0) == 0.0):
        stamps = as_int.to_numpy(dtype=np.float64).astype(np.int64)
    else:
        parsed = pd.to_datetime(stripped, errors="coerce", format="ISO8601")
        bad = np.flatnonzero(parsed.isna().to_numpy())
        if bad.size:
            row = int(bad[0]) + 1
            raise LoadError(f"unparseable timestamp at row {row} column {column!r}", row=row, column=column)
        ns = parsed.to_numpy(dtype="datetime64[ns]").astype(np.int64)
        _check_monotone(ns, column)
        # ISO instants become ordinal indices once their order is validated
        return np.arange(ns.shape[0], dtype=np.int64)
    _check_monotone(stamps, column)
    return stamps


def _check_monotone(stamps: np.ndarray, column: str) -> None:
    if stamps.size < 2:
        return
    bad = np.flatnonzero(np.diff(stamps) <= 0)
    if bad.size:
        row = int(bad[0]) + 2
        raise LoadError(f"non-monotone timestamps at row {row}", row=row, column=column)


def _parse_values(frame: pd.DataFrame, columns: Sequence[str]) -> np.ndarray:
    out = np.empty((len(frame), len(columns)), dtype=np.float64)
    for j, col in enumerate(columns):
        parsed = pd.to_numeric(frame[col].str.strip(), errors="coerce").to_numpy(dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(parsed))
        if bad.size:
            row = int(bad[0]) + 1
            raise LoadError(
                f"non-numeric value {frame[col].iloc[bad[0]]!r} at row {row} column {col!r}",
                row=row,
                column=col,
            )
        out[:, j] = parsed
    return out


def _parse_labels(raw: pd.Series, column: str) -> np.ndarray:
    stripped = raw.str.strip()
    as_num = pd.to_numeric(stripped, errors="coerce")
    ok = as_num.isin([0, 1]).to_numpy()
    if not ok.all():
        row = int(np.flatnonzero(~ok)[0]) + 1
        raise LoadError(
            f"label must be 0 or 1, got {stripped.iloc[row - 1]!r} at row {row} column {column!r}",
            row=row,
            column=column,
        )
    return as_num.to_numpy(dtype=np.float64) == 1.0


def load_series(source: Source, schema: Optional[ColumnSchema] = None, name: Optional[str] = None) -> TimeSeries:
    schema = schema or ColumnSchema()
    frame = _read_frame(source)
    header = list(frame.columns)

    ts_col = schema.timestamp
    if ts_col not in header and ts_col == "timestamp" and TIMESTAMP_FALLBACK in header:
        ts_col = TIMESTAMP_FALLBACK
    if ts_col not in header:
        raise LoadError(f"missing declared column {schema.timestamp!r}", column=schema.timestamp)
    for col in schema.values:
        if col not in header:
            raise LoadError(f"missing declared column {col!r}", column=col)

    label_col = schema.label
    if label_col is not None and label_col not in header:
        raise LoadError(f"missing declared column {label_col!r}", column=label_col)
    if label_col is None:
        label_col = next((c for c in LABEL_COLUMN_CANDIDATES if c in header), None)

    if len(frame) == 0:
        raise LoadError("CSV has a header but no rows")

    timestamps = _parse_timestamps(frame[ts_col], ts_col)
    values = _parse_values(frame, schema.values)
    labels = _parse_labels(frame[label_col], label_col) if label_col else None

    if name is None:
        name = Path(source).stem if isinstance(source, (str, Path)) else "series"
    series = TimeSeries(timestamps, values, labels, name, tuple(schema.values))
    logger.debug(
        "[load] name=%s | n=%d | d=%d | labels=%s", series.name, series.n, series.d, "yes" if labels is not None else "no"
    )
    return series


# ----------------------------------------------------------------------------
# rescaling
# ----------------------------------------------------------------------------

def fit_scaling(series: TimeSeries) -> ScalingStats:
    return ScalingStats(series.values.min(axis=0), series.values.max(axis=0))


def apply_scaling(series: TimeSeries, stats: ScalingStats) -> TimeSeries:
    if stats.mins.shape[0] != series.d:
        raise DataError(f"scaling has {stats.mins.shape[0]} dimensions, series has {series.d}")
    span = stats.maxs - stats.mins
    degenerate = span == 0
    if degenerate.any():
        logger.warning(
            "[rescale] constant dimension(s) %s in %s; mapping to 0.0",
            [series.columns[i] for i in np.flatnonzero(degenerate)],
            series.name,
        )
    safe_span = np.where(degenerate, 1.0, span)
    z = (series.values - stats.mins) / safe_span
    z[:, degenerate] = 0.0
    return replace(series, values=z)


def rescale(series: TimeSeries) -> TimeSeries:
    """Per-dimension min-max scaling to [0, 1] using the series' own bounds."""
    return apply_scaling(series, fit_scaling(series))


# ----------------------------------------------------------------------------
# windowing
# ----------------------------------------------------------------------------

def windows(series: TimeSeries, plan: WindowPlan) -> Windows:
    if series.n < plan.w:
        raise InsufficientDataError(f"series shorter than window (N={series.n}, w={plan.w})")
    view = np.lib.stride_tricks.sliding_window_view(series.values, plan.w, axis=0)
    # sliding_window_view puts the window axis last: (N-w+1, d, w)
    segments = np.ascontiguousarray(view[:: plan.hop].transpose(0, 2, 1))
    starts = plan.starts(series.n)
    return Windows(starts, segments, plan)


def split_prefix(series: TimeSeries, fraction: float, minimum: int = 0) -> Tuple[TimeSeries, int]:
    """Training prefix of `fraction` of the series (at least `minimum` points)."""
    n_train = max(int(round(series.n * fraction)), minimum)
    n_train = min(n_train, series.n)
    return series.slice(0, n_train), n_train

