"""Temporal dependence of a series: autocorrelation, delayed mutual information
and the choice of embedding length."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .timeseries import WindSeries


class LagNotConvergedWarning(UserWarning):
    """The mutual-information profile never fell below the threshold."""


@dataclass(frozen=True)
class DelayProfile:
    """ACF over lags ``0..max_delay`` and MI (bits) over lags ``1..max_delay``.

    The ACF uses the biased normalization (shared ``sum((x - mean)**2)``
    denominator), so ``|acf[k]| <= 1``.
    """

    max_delay: int
    acf: np.ndarray
    mi_bits: np.ndarray
    selected_lag: int
    converged: bool = True


def _values(series) -> np.ndarray:
    if isinstance(series, WindSeries):
        return series.values
    return np.asarray(series, dtype=np.float64).ravel()


def autocorrelation(series, max_lag: int) -> np.ndarray:
    x = _values(series)
    n = x.size
    if max_lag < 0 or max_lag >= n:
        raise ValueError(f"max_lag must lie in [0, {n - 1}], got {max_lag}")
    dev = x - x.mean()
    denom = float(np.dot(dev, dev))
    if denom == 0.0:
        raise ValueError("autocorrelation undefined for a zero-variance series")
    acf = np.empty(max_lag + 1)
    acf[0] = 1.0
    for k in range(1, max_lag + 1):
        acf[k] = np.dot(dev[: n - k], dev[k:]) / denom
    return acf


def _bin_indices(x: np.ndarray, bins: int) -> np.ndarray:
    lo, hi = x.min(), x.max()
    if lo == hi:
        raise ValueError("mutual information undefined for a constant series")
    idx = np.floor((x - lo) / (hi - lo) * bins).astype(np.int64)
    return np.clip(idx, 0, bins - 1)


def mi_from_joint(counts: np.ndarray) -> float:
    """Plug-in MI in bits from a 2-D table of co-occurrence counts.

    Marginals are row and column sums of the same table; empty cells add 0.
    """
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    pxy = counts / total
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    nz = pxy > 0
    ratio = pxy[nz] / (px * py)[nz]
    mi = float(np.sum(pxy[nz] * np.log2(ratio)))
    # cell terms are not individually nonnegative; rounding can leave -1e-17
    return max(mi, 0.0)


def mutual_information(series, delay: int, bins: int = 16) -> float:
    """MI in bits between ``x[t]`` and ``x[t + delay]``.

    Both coordinates share equal-width bins spanning the min/max of the whole
    series. ``bins=1`` is allowed and gives exactly 0.
    """
    x = _values(series)
    if delay < 1:
        raise ValueError(f"delay must be >= 1, got {delay}")
    if x.size <= delay + 1:
        raise ValueError(f"series of length {x.size} too short for delay {delay}")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    idx = _bin_indices(x, bins)
    joint = np.bincount(idx[:-delay] * bins + idx[delay:], minlength=bins * bins)
    return mi_from_joint(joint.reshape(bins, bins))


def plugin_bias_bits(n_pairs: int, bins: int) -> float:
    """First-order upward bias of the plug-in MI estimate for independent data."""
    return (bins - 1) ** 2 / (2.0 * n_pairs * math.log(2))


def select_embedding_lag(
    mi_bits, threshold_fraction: float = 0.05, rule: str = "threshold", noise_floor: float = 0.0
) -> int:
    """Pick the embedding length from an MI profile indexed by delay ``1..len``.

    ``rule="threshold"`` returns the first delay whose MI drops below
    ``max(threshold_fraction * mi_bits[0], noise_floor)``.
    ``rule="first_minimum"`` returns the first local minimum. If neither
    occurs the last delay is returned and a :class:`LagNotConvergedWarning`
    is emitted.
    """
    lag, converged = _select(mi_bits, threshold_fraction, rule, noise_floor)
    if not converged:
        warnings.warn(
            f"MI profile did not vanish within {lag} delays; using max_delay", LagNotConvergedWarning, stacklevel=2
        )
    return lag


def _select(mi_bits, threshold_fraction: float, rule: str, noise_floor: float = 0.0) -> tuple[int, bool]:
    mi = np.asarray(mi_bits, dtype=np.float64).ravel()
    if mi.size == 0:
        raise ValueError("empty MI profile")
    if not np.any(mi > 0):
        raise ValueError("MI profile is all zero; no dependence to measure")
    if mi[0] <= 0:
        raise ValueError("MI at delay 1 must be positive")
    if rule == "threshold":
        if not 0 < threshold_fraction < 1:
            raise ValueError(f"threshold_fraction must lie in (0, 1), got {threshold_fraction}")
        below = np.flatnonzero(mi < max(threshold_fraction * mi[0], noise_floor))
        if below.size:
            return int(below[0]) + 1, True
    elif rule == "first_minimum":
        for d in range(1, mi.size - 1):
            if mi[d] < mi[d - 1] and mi[d] <= mi[d + 1]:
                return d + 1, True
    else:
        raise ValueError(f"unknown lag rule {rule!r}")
    return int(mi.size), False


def mi_profile(
    series, max_delay: int, bins: int = 16, threshold_fraction: float = 0.05, rule: str = "threshold"
) -> DelayProfile:
    """ACF and MI over delays ``1..max_delay`` plus the selected lag.

    MI values below twice the plug-in bias of an independent sample of the
    same size count as vanished, so pure noise selects lag 1.
    """
    x = _values(series)
    acf = autocorrelation(x, max_delay)
    mi = np.array([mutual_information(x, d, bins) for d in range(1, max_delay + 1)])
    floor = 2.0 * plugin_bias_bits(x.size - 1, bins)
    lag, converged = _select(mi, threshold_fraction, rule, floor)
    if not converged:
        warnings.warn(
            f"MI profile did not vanish within {max_delay} delays; using max_delay",
            LagNotConvergedWarning,
            stacklevel=2,
        )
    return DelayProfile(max_delay, acf, mi, lag, converged)


class LagSelector(BaseEstimator):
    """Estimator wrapper: ``fit`` a 1-D series, read ``selected_lag_``."""

    def __init__(self, max_delay=100, bins=16, threshold_fraction=0.05, rule="threshold"):
        self.max_delay = max_delay
        self.bins = bins
        self.threshold_fraction = threshold_fraction
        self.rule = rule

    def fit(self, X, y=None):
        self.profile_ = mi_profile(X, self.max_delay, self.bins, self.threshold_fraction, self.rule)
        self.selected_lag_ = self.profile_.selected_lag
        return self
