"""Seeded synthetic speed series for tests and dataset-free pipeline runs.

All generators return a :class:`WindSeries` starting 2004-01-01T00:00Z at a
600 s cadence unless told otherwise, with values clipped at 0.

* ``noise``: i.i.d. uniform on ``[0, 2 * offset]``.
* ``ar2``: ``z[t] = phi1 z[t-1] + phi2 z[t-2] + N(0, sigma^2)`` after a burn-in,
  reported as ``offset + z``.
* ``sine``: ``offset + amplitude * sin(2 pi t / period) + N(0, sigma^2)``.
"""

from __future__ import annotations

import numpy as np

from .timeseries import WindSeries

DEFAULT_START = 1072915200  # 2004-01-01T00:00:00Z
BURN_IN = 1000


def check_ar2_stationary(phi1: float, phi2: float) -> None:
    # roots of 1 - phi1 z - phi2 z^2 outside the unit circle
    if not (abs(phi2) < 1 and phi1 + phi2 < 1 and phi2 - phi1 < 1):
        roots = np.roots([-phi2, -phi1, 1.0]) if phi2 else np.array([1.0 / phi1 if phi1 else np.inf])
        raise ValueError(
            f"AR(2) coefficients phi1={phi1}, phi2={phi2} are not stationary "
            f"(characteristic roots {np.round(roots, 4).tolist()} must lie outside the unit circle)"
        )


def noise(length: int, offset: float = 8.0, seed: int = 0, start_epoch=DEFAULT_START, interval_s=600) -> WindSeries:
    rng = np.random.default_rng(seed)
    return WindSeries(start_epoch, interval_s, rng.uniform(0.0, 2.0 * offset, size=length))


def ar2(
    length: int,
    phi1: float = 1.2,
    phi2: float = -0.3,
    sigma: float = 0.5,
    offset: float = 8.0,
    seed: int = 0,
    start_epoch=DEFAULT_START,
    interval_s=600,
) -> WindSeries:
    check_ar2_stationary(phi1, phi2)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    rng = np.random.default_rng(seed)
    eps = rng.normal(0.0, sigma, size=length + BURN_IN)
    z = np.zeros(length + BURN_IN)
    for t in range(2, z.size):
        z[t] = phi1 * z[t - 1] + phi2 * z[t - 2] + eps[t]
    return WindSeries(start_epoch, interval_s, np.maximum(offset + z[BURN_IN:], 0.0))


def sine(
    length: int,
    period: float = 144.0,
    amplitude: float = 3.0,
    sigma: float = 0.0,
    offset: float = 8.0,
    seed: int = 0,
    start_epoch=DEFAULT_START,
    interval_s=600,
) -> WindSeries:
    if period <= 0:
        raise ValueError(f"period must be positive, got {period}")
    rng = np.random.default_rng(seed)
    t = np.arange(length)
    values = offset + amplitude * np.sin(2 * np.pi * t / period) + rng.normal(0.0, sigma, size=length)
    return WindSeries(start_epoch, interval_s, np.maximum(values, 0.0))


GENERATORS = {"noise": noise, "ar2": ar2, "sine": sine}
