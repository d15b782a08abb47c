"""Sliding-window delay embedding and the train/validation/test split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.base import BaseEstimator, TransformerMixin

from .timeseries import WindSeries


@dataclass(frozen=True, eq=False)
class EmbeddingDataset:
    """Row ``i`` holds ``source[origin + i : origin + i + m]``; its target is
    ``source[origin + i + m]``."""

    m: int
    inputs: np.ndarray
    targets: np.ndarray
    origin_index: int = 0

    def __len__(self):
        return self.targets.size

    def rows(self, start: int, stop: int) -> "EmbeddingDataset":
        return EmbeddingDataset(self.m, self.inputs[start:stop], self.targets[start:stop], self.origin_index + start)


@dataclass(frozen=True)
class SplitPlan:
    train: EmbeddingDataset
    validation: EmbeddingDataset
    test_start_index: int


def _values(series) -> np.ndarray:
    if isinstance(series, WindSeries):
        return series.values
    return np.asarray(series, dtype=np.float64).ravel()


def embed(series, m: int, origin_index: int = 0) -> EmbeddingDataset:
    x = _values(series)
    if m < 1:
        raise ValueError(f"embedding length must be >= 1, got {m}")
    if x.size <= m:
        raise ValueError(f"series of length {x.size} too short for embedding length {m}")
    inputs = np.ascontiguousarray(sliding_window_view(x[:-1], m))
    inputs.setflags(write=False)
    targets = x[m:].copy()
    targets.setflags(write=False)
    return EmbeddingDataset(m, inputs, targets, origin_index)


def plan_split(series, m: int, n_train: int = 2016, n_validation: int = 2016) -> SplitPlan:
    """First ``n_train`` embedding rows train, the next ``n_validation`` validate.

    ``test_start_index`` is the first sample after the last validation target,
    i.e. ``m + n_train + n_validation``.
    """
    x = _values(series)
    if n_train < 1 or n_validation < 0:
        raise ValueError("n_train must be >= 1 and n_validation >= 0")
    test_start = m + n_train + n_validation
    if x.size <= test_start:
        raise ValueError(
            f"series of length {x.size} needs more than {test_start} samples "
            f"(m={m}, n_train={n_train}, n_validation={n_validation}) to leave a test span"
        )
    ds = embed(x[:test_start], m)
    return SplitPlan(ds.rows(0, n_train), ds.rows(n_train, n_train + n_validation), test_start)


class DelayEmbedder(TransformerMixin, BaseEstimator):
    """Turn a 1-D series into the lagged-window matrix (one row per target).

    ``transform`` returns the inputs only; :meth:`transform_xy` also returns
    the aligned targets.
    """

    def __init__(self, m=72):
        self.m = m

    def fit(self, X, y=None):
        if int(self.m) < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        self.n_features_out_ = int(self.m)
        return self

    def transform(self, X):
        return embed(X, self.m).inputs

    def transform_xy(self, X):
        ds = embed(X, self.m)
        return ds.inputs, ds.targets
