"""One-step and iterated forecasts, RMSE scoring and rolling block evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from numpy.lib.stride_tricks import sliding_window_view

from .timeseries import WindSeries

_TINY = float(np.nextafter(0.0, 1.0))


@dataclass(frozen=True)
class BlockResult:
    block_index: int
    test_start_index: int
    horizon_steps: int
    rmse: float
    n_forecasts: int
    step_rmse: tuple[float, ...] = field(default=())


@dataclass(frozen=True)
class EvalReport:
    """Per-block scores; ``trend`` is the OLS line ``(slope, intercept)`` of
    block RMSE against block ordinal."""

    windows: list[BlockResult]
    average_rmse: float
    trend: tuple[float, float]

    @property
    def slope(self) -> float:
        return self.trend[0]

    @property
    def intercept(self) -> float:
        return self.trend[1]

    def summary(self) -> dict:
        return {"average_rmse": self.average_rmse, "slope": self.slope, "intercept": self.intercept}


def _window(model, window) -> np.ndarray:
    w = np.asarray(window, dtype=np.float64)
    if w.ndim != 1 or w.size != model.m:
        raise ValueError(f"window must hold {model.m} values, got shape {w.shape}")
    return w


def predict_one_step(model, window) -> float:
    w = _window(model, window)
    return float(np.asarray(model.predict(w[None, :]))[0])


def iterate_forecast(model, windows: np.ndarray, steps: int) -> np.ndarray:
    """Recursive forecasts for a batch of windows, shape ``(n, steps)``.

    Each step predicts one value, drops the oldest entry of every window and
    appends the prediction.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    windows = np.array(windows, dtype=np.float64, ndmin=2)
    if windows.shape[1] != model.m:
        raise ValueError(f"windows must hold {model.m} values, got shape {windows.shape}")
    m = model.m
    buf = np.empty((windows.shape[0], m + steps))
    buf[:, :m] = windows
    for k in range(steps):
        buf[:, m + k] = model.predict(buf[:, k : k + m])
    return buf[:, m:]


def predict_horizon(model, window, steps: int) -> list[float]:
    w = _window(model, window)
    return iterate_forecast(model, w[None, :], steps)[0].tolist()


def persistence_forecast(window, steps: int) -> list[float]:
    w = np.asarray(window, dtype=np.float64).ravel()
    if w.size == 0:
        raise ValueError("persistence forecast needs a non-empty window")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    return [float(w[-1])] * steps


def rmse(actual, predicted) -> float:
    a = np.asarray(actual, dtype=np.float64).ravel()
    p = np.asarray(predicted, dtype=np.float64).ravel()
    if a.size != p.size:
        raise ValueError(f"length mismatch: {a.size} actual vs {p.size} predicted")
    if a.size == 0:
        raise ValueError("rmse of empty vectors")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(p))):
        raise ValueError("rmse inputs must be finite")
    d = np.abs(a - p)
    scale = d.max()
    if scale == 0.0:
        return 0.0
    # scaled so tiny differences do not underflow; a subnormal result that
    # still rounds to 0 is bumped to the smallest positive float
    return max(float(scale * math.sqrt(np.mean((d / scale) ** 2))), _TINY)


def trend_fit(points) -> tuple[float, float]:
    """Ordinary least-squares line through ``(index, value)`` pairs."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("trend_fit needs at least two (index, value) points")
    x, y = pts[:, 0], pts[:, 1]
    dx = x - x.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise ValueError("trend_fit needs at least two distinct indices")
    slope = float(np.dot(dx, y - y.mean())) / sxx
    return slope, float(y.mean() - slope * x.mean())


def _block(model, x: np.ndarray, ordinal: int, start: int, block_len: int, steps: int) -> BlockResult:
    m = model.m
    origins = np.arange(start, start + block_len)
    windows = sliding_window_view(x, m)[origins - m]
    preds = iterate_forecast(model, windows, steps)
    actual = sliding_window_view(x, steps)[origins]
    step_rmse = tuple(rmse(actual[:, k], preds[:, k]) for k in range(steps))
    return BlockResult(ordinal, int(start), steps, step_rmse[-1], block_len, step_rmse)


def block_starts(n: int, m: int, first_test_index: int, stride: int, horizon_steps: int, block_len: int) -> list[int]:
    if first_test_index < m:
        raise ValueError(f"first_test_index {first_test_index} precedes the first full window (m={m})")
    if stride < 1 or block_len < 1 or horizon_steps < 1:
        raise ValueError("stride, block_len and horizon_steps must all be >= 1")
    starts = []
    s = first_test_index
    while s + block_len + horizon_steps - 1 <= n:
        starts.append(s)
        s += stride
    if not starts:
        raise ValueError(
            f"series of length {n} cannot hold one block of {block_len} origins "
            f"at horizon {horizon_steps} from index {first_test_index}"
        )
    return starts


def rolling_evaluate(
    model,
    series,
    first_test_index: int,
    stride: int = 2016,
    horizon_steps: int = 6,
    block_len: int = 2016,
    n_jobs: int = 1,
) -> EvalReport:
    """Score forecasts block by block across the test span.

    Blocks start at ``first_test_index + k * stride``. Every sample ``o`` in a
    block is a forecast origin: the window is the ``m`` recorded values before
    ``o`` and the forecast runs ``horizon_steps`` ahead, feeding back only its
    own predictions. The block RMSE compares the final step with the recorded
    value at ``o + horizon_steps - 1``; ``step_rmse`` keeps every step.
    A block counts only if all its targets exist. With a single block the trend
    is flat through its RMSE.
    """
    x = series.values if isinstance(series, WindSeries) else np.asarray(series, dtype=np.float64).ravel()
    starts = block_starts(x.size, model.m, first_test_index, stride, horizon_steps, block_len)
    jobs = (delayed(_block)(model, x, i, s, block_len, horizon_steps) for i, s in enumerate(starts))
    if n_jobs == 1:
        windows = [fn(*args, **kw) for fn, args, kw in jobs]
    else:
        windows = Parallel(n_jobs=n_jobs, prefer="threads")(jobs)
    scores = [w.rmse for w in windows]
    average = math.fsum(scores) / len(scores)
    if len(windows) >= 2:
        trend = trend_fit([(w.block_index, w.rmse) for w in windows])
    else:
        trend = (0.0, average)
    return EvalReport(list(windows), average, trend)
