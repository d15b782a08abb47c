"""CART regression trees grown by greedy variance reduction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Gains within GAIN_RTOL * Var(parent) of the best are ties; ties go to the lowest
# feature index, then the lowest threshold. Gains at or below that margin count
# as "no positive gain".
GAIN_RTOL = 1e-9


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    gain: float


def midpoint(lo: float, hi: float) -> float:
    """Threshold between two consecutive distinct values; always ``lo <= t < hi``."""
    t = (lo + hi) / 2.0
    return lo if t >= hi else t


def best_split(X: np.ndarray, y: np.ndarray, rows: np.ndarray, features, min_leaf: int) -> Split | None:
    """Best variance-reducing split of ``rows`` over the candidate ``features``.

    Gain is ``Var(parent) - nL/n Var(left) - nR/n Var(right)`` (population
    variances). Thresholds sit midway between consecutive distinct values and
    both children must keep at least ``min_leaf`` rows. Returns ``None`` when no
    split beats the tie margin.
    """
    rows = np.asarray(rows)
    features = np.sort(np.asarray(features, dtype=np.intp))
    n = rows.size
    if n < 2 * min_leaf or n < 2 or features.size == 0:
        return None
    yc = y[rows]
    yc = yc - yc.mean()
    parent_sse = float(np.dot(yc, yc))
    if parent_sse == 0.0:
        return None

    xs = X[np.ix_(rows, features)]
    order = np.argsort(xs, axis=0, kind="stable")
    xs = np.take_along_axis(xs, order, axis=0)
    ys = yc[order]
    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys * ys, axis=0)
    tot, totsq = csum[-1], csq[-1]
    csum, csq = csum[:-1], csq[:-1]
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    sse_left = csq - csum * csum / n_left
    sse_right = (totsq - csq) - (tot - csum) ** 2 / n_right
    gain = (parent_sse - sse_left - sse_right) / n

    valid = xs[:-1] < xs[1:]
    lo, hi = min_leaf - 1, n - min_leaf
    valid[:lo] = False
    valid[hi:] = False
    gain = np.where(valid, gain, -np.inf)

    best = gain.max()
    tol = GAIN_RTOL * parent_sse / n
    if not best > tol:
        return None
    near = gain >= best - tol
    col = int(np.flatnonzero(near.any(axis=0))[0])
    pos = int(np.flatnonzero(near[:, col])[0])
    return Split(int(features[col]), midpoint(float(xs[pos, col]), float(xs[pos + 1, col])), float(gain[pos, col]))


@dataclass(eq=False)
class RegressionTree:
    """Array-encoded binary tree; ``feature[i] == -1`` marks a leaf.

    ``value`` holds every node's in-bag target mean (the prediction at leaves),
    ``n_samples`` the in-bag count routed to each node, and ``in_bag_counts``
    the bootstrap multiplicity of every training row (``None`` if unknown).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    in_bag_counts: np.ndarray | None = None

    @property
    def node_count(self) -> int:
        return self.feature.size

    @property
    def leaf_values(self) -> np.ndarray:
        return self.value[self.feature < 0]

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf id reached by every row of ``X`` (``x <= threshold`` goes left)."""
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=np.intp)
        active = np.arange(X.shape[0])
        while active.size:
            f = self.feature[node[active]]
            internal = f >= 0
            active, f = active[internal], f[internal]
            cur = node[active]
            go_left = X[active, f] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


def _mean(values: np.ndarray) -> float:
    # exactly rounded, independent of row order
    return math.fsum(values.tolist()) / values.size


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    mtry: int,
    min_leaf: int,
    max_depth: int | None,
    rng: np.random.Generator,
) -> RegressionTree:
    """Grow one tree on the row multiset ``rows`` (repeats allowed).

    Nodes are expanded depth-first, left child before right; each node that
    reaches the split search draws ``mtry`` features without replacement from
    ``rng``, so the stream is consumed in a fixed order.
    """
    rows = np.asarray(rows, dtype=np.intp)
    if rows.size == 0:
        raise ValueError("cannot grow a tree on zero rows")
    n_features = X.shape[1]
    if not 1 <= mtry <= n_features:
        raise ValueError(f"mtry must lie in [1, {n_features}], got {mtry}")

    feature, threshold, left, right, value, count = [], [], [], [], [], []

    def new_node(node_rows):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(_mean(y[node_rows]))
        count.append(node_rows.size)
        return len(feature) - 1

    stack = [(new_node(rows), rows, 0)]
    while stack:
        node, node_rows, depth = stack.pop()
        targets = y[node_rows]
        if (
            node_rows.size < 2 * min_leaf
            or targets.min() == targets.max()
            or (max_depth is not None and depth >= max_depth)
        ):
            continue
        candidates = rng.choice(n_features, size=mtry, replace=False)
        split = best_split(X, y, node_rows, candidates, min_leaf)
        if split is None:
            continue
        mask = X[node_rows, split.feature] <= split.threshold
        l_rows, r_rows = node_rows[mask], node_rows[~mask]
        feature[node] = split.feature
        threshold[node] = split.threshold
        left[node] = new_node(l_rows)
        right[node] = new_node(r_rows)
        stack.append((right[node], r_rows, depth + 1))
        stack.append((left[node], l_rows, depth + 1))

    return RegressionTree(
        np.array(feature, dtype=np.intp),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.intp),
        np.array(right, dtype=np.intp),
        np.array(value, dtype=np.float64),
        np.array(count, dtype=np.intp),
    )
