"""CSV ingestion, min-max scaling and lag windowing."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import IngestionError, InsufficientDataError


@dataclass
class TimeSeriesDataset:
    """``values[t, j]`` is variable ``names[j]`` at step ``t``.

    ``normalization`` holds a ``(2, n)`` array of per-variable (min, max) once
    the data has been scaled. ``noise`` is the additive noise recorded by the
    synthetic generators (same shape as ``values``) and ``truth`` an optional
    ground-truth :class:`~tscausalnn.graph.TemporalGraph`.
    """

    names: list
    values: np.ndarray
    normalization: np.ndarray | None = None
    noise: np.ndarray | None = None
    truth: object = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.names):
            raise ValueError(
                f"values must be T x {len(self.names)}, got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("dataset values contain NaN or Inf")

    @property
    def T(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[1]


@dataclass
class WindowedBatch:
    """``samples[s, i, c]`` is variable ``i`` at absolute step ``s + c``; column ``l_max`` is the target step."""

    samples: np.ndarray
    l_max: int
    names: list

    @property
    def n_samples(self):
        return self.samples.shape[0]

    @property
    def n(self):
        return self.samples.shape[1]

    @property
    def targets(self):
        return self.samples[:, :, self.l_max]


def load_csv(path):
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise IngestionError(f"{path} is empty")
    names = [h.strip() for h in rows[0]]
    if len(set(names)) != len(names):
        raise IngestionError(f"{path}: duplicate column names in header")
    data = np.empty((len(rows) - 1, len(names)))
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != len(names):
            raise IngestionError(
                f"{path}: expected {len(names)} cells, found {len(row)}", row=r
            )
        for c, cell in enumerate(row, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise IngestionError(f"{path}: non-numeric cell {cell!r}", row=r, col=c) from None
            if not math.isfinite(v):
                raise IngestionError(f"{path}: non-finite cell {cell!r}", row=r, col=c)
            data[r - 1, c - 1] = v
    return TimeSeriesDataset(names, data)


def write_csv(data, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(data.names)
        for row in data.values:
            w.writerow([repr(float(v)) for v in row])
    return path


class MinMaxNormalizer(TransformerMixin, BaseEstimator):
    """Per-column min-max scaling to [0, 1]; constant columns map to 0.5."""

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.data_min_ = X.min(axis=0)
        self.data_max_ = X.max(axis=0)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        span = self.data_max_ - self.data_min_
        const = span == 0
        out = (X - self.data_min_) / np.where(const, 1.0, span)
        out[:, const] = 0.5
        return out

    def inverse_transform(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        span = self.data_max_ - self.data_min_
        return X * span + self.data_min_


class LagWindower(TransformerMixin, BaseEstimator):
    """Stack each step with its ``l_max`` predecessors: ``(T, n) -> (T - l_max, n, l_max + 1)``."""

    def __init__(self, l_max=5):
        self.l_max = l_max

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        X = check_array(X, dtype=np.float64)
        T = X.shape[0]
        if self.l_max < 0:
            raise ValueError("l_max must be non-negative")
        if T <= self.l_max:
            raise InsufficientDataError(f"need more than l_max={self.l_max} steps, got T={T}")
        idx = np.arange(T - self.l_max)[:, None] + np.arange(self.l_max + 1)[None, :]
        return np.ascontiguousarray(X[idx].transpose(0, 2, 1))


def normalize(data):
    if data.T < 2:
        raise InsufficientDataError("normalization needs at least two steps")
    scaler = MinMaxNormalizer().fit(data.values)
    record = np.vstack([scaler.data_min_, scaler.data_max_])
    return replace(data, values=scaler.transform(data.values), normalization=record)


def denormalize(data):
    if data.normalization is None:
        raise ValueError("dataset carries no normalization record")
    lo, hi = data.normalization
    return replace(data, values=data.values * (hi - lo) + lo, normalization=None)


def window(data, l_max):
    samples = LagWindower(l_max).transform(data.values)
    return WindowedBatch(samples, l_max, list(data.names))
