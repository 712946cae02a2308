"""Time series and feature matrices built from job records."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, NamedTuple, Sequence

import numpy as np

from .trace import JobRecord

FIVE_MINUTES_US = 300_000_000
FEATURE_NAMES = ("interarrival_us", "parallelism", "cpu", "ram", "disk")
REQUEST_NAMES = ("cpu", "ram", "disk")


@dataclass
class MultiSeries:
    values: np.ndarray  # (length, dims)
    names: tuple[str, ...]
    meta: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.values.ndim != 2:
            raise ValueError("series values must be 2-D (length, dims)")
        if len(self.names) != self.values.shape[1]:
            raise ValueError(f"{len(self.names)} names for {self.values.shape[1]} dimensions")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series contains non-finite values")

    @property
    def dims(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.values.shape[0]


class FeatureVector(NamedTuple):
    interarrival_us: float
    parallelism: float
    cpu: float
    ram: float
    disk: float


def _check_sorted(jobs: Sequence[JobRecord]) -> np.ndarray:
    arr = np.array([j.arrival_us for j in jobs], dtype=np.int64)
    if arr.size > 1 and np.any(np.diff(arr) < 0):
        raise ValueError("jobs must be sorted by arrival time")
    return arr


def interarrival_series(jobs: Sequence[JobRecord]) -> MultiSeries:
    arr = _check_sorted(jobs)
    gaps = np.zeros(arr.size, dtype=np.int64)
    gaps[1:] = np.diff(arr)
    return MultiSeries(gaps.astype(float)[:, None], ("interarrival_us",), "inter-arrival time")


def aggregate_requests(jobs: Sequence[JobRecord], slot_us: int = FIVE_MINUTES_US) -> MultiSeries:
    """Sum of job request vectors per slot ``floor(arrival / slot_us)``; empty slots are zero."""
    if slot_us <= 0:
        raise ValueError("slot_us must be positive")
    arr = _check_sorted(jobs)
    meta = f"aggregated requests per {slot_us} us slot"
    if arr.size == 0:
        return MultiSeries(np.zeros((0, 3)), REQUEST_NAMES, meta)
    slot = arr // int(slot_us)
    req = np.array([[j.request.cpu, j.request.ram, j.request.disk] for j in jobs])
    out = np.zeros((int(slot.max()) + 1, 3))
    np.add.at(out, slot, req)
    return MultiSeries(out, REQUEST_NAMES, meta)


def feature_vectors(jobs: Sequence[JobRecord]) -> list[FeatureVector]:
    gaps = interarrival_series(jobs).values[:, 0]
    return [
        FeatureVector(float(g), float(j.parallelism), j.request.cpu, j.request.ram, j.request.disk)
        for g, j in zip(gaps, jobs)
    ]


def feature_matrix(jobs: Sequence[JobRecord]) -> np.ndarray:
    return np.array(feature_vectors(jobs), dtype=float).reshape(-1, len(FEATURE_NAMES))


# -- scaling -------------------------------------------------------------------

@dataclass
class Scaler:
    """Per-dimension min-max map onto [0, 1]. Constant dimensions map to 0."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if np.any(self.hi < self.lo):
            raise ValueError("scaler max below min")

    @property
    def span(self) -> np.ndarray:
        return self.hi - self.lo

    def to_dict(self) -> dict:
        return {"min": self.lo.tolist(), "max": self.hi.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Scaler":
        return cls(d["min"], d["max"])

    @classmethod
    def identity(cls, dims: int) -> "Scaler":
        return cls(np.zeros(dims), np.ones(dims))

    def subset(self, dims: Sequence[int]) -> "Scaler":
        return Scaler(self.lo[list(dims)], self.hi[list(dims)])


def fit_scaler(series: MultiSeries | np.ndarray, fit_range: slice | tuple[int, int] | None = None) -> Scaler:
    values = series.values if isinstance(series, MultiSeries) else np.asarray(series, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if fit_range is None:
        fit_range = slice(None)
    elif isinstance(fit_range, tuple):
        fit_range = slice(*fit_range)
    part = values[fit_range]
    if part.shape[0] == 0:
        raise ValueError("fit range is empty")
    return Scaler(part.min(axis=0), part.max(axis=0))


def _raw(x):
    return x.values if isinstance(x, MultiSeries) else np.asarray(x, dtype=float)


def apply(scaler: Scaler, series):
    values = _raw(series)
    span = scaler.span
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (values - scaler.lo) / safe, 0.0)
    if isinstance(series, MultiSeries):
        return MultiSeries(out, series.names, series.meta)
    return out


def invert(scaler: Scaler, series):
    values = _raw(series)
    out = values * scaler.span + scaler.lo
    if isinstance(series, MultiSeries):
        return MultiSeries(out, series.names, series.meta)
    return out


# -- supervised framing -----------------------------------------------------------

@dataclass
class WindowedDataset:
    inputs: np.ndarray  # (count, lookback, dims)
    targets: np.ndarray  # (count, dims)
    lookback: int

    def __len__(self) -> int:
        return self.targets.shape[0]

    def split(self, validation_fraction: float) -> tuple["WindowedDataset", "WindowedDataset"]:
        """Chronological split: the last fraction of windows is held out."""
        n_val = int(np.floor(len(self) * validation_fraction))
        cut = len(self) - n_val
        return (WindowedDataset(self.inputs[:cut], self.targets[:cut], self.lookback),
                WindowedDataset(self.inputs[cut:], self.targets[cut:], self.lookback))


def window(series, lookback: int, horizon: int = 1) -> WindowedDataset:
    if horizon != 1:
        raise ValueError("only one-step-ahead windows are supported")
    if lookback < 1:
        raise ValueError("lookback must be >= 1")
    values = _raw(series)
    if values.ndim == 1:
        values = values[:, None]
    n = values.shape[0]
    if n <= lookback:
        raise ValueError(f"series of length {n} is too short for lookback {lookback}")
    idx = np.arange(lookback)[None, :] + np.arange(n - lookback)[:, None]
    return WindowedDataset(values[idx], values[lookback:].copy(), lookback)


# -- CSV i/o ---------------------------------------------------------------------

def write_series_csv(series: MultiSeries, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(series.names)
    for row in series.values:
        w.writerow([repr(float(v)) for v in row])


def read_series_csv(fh: IO[str], meta: str = "") -> MultiSeries:
    reader = csv.reader(fh)
    header = next(reader, None)
    if not header:
        raise ValueError("series file has no header row")
    rows = [[float(v) for v in row] for row in reader if row]
    values = np.array(rows, dtype=float).reshape(-1, len(header))
    return MultiSeries(values, tuple(header), meta)
