"""Bagged random forest of regression trees."""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..embedding import EmbeddingDataset
from .tree import RegressionTree, grow_tree

_SEED_LIMIT = 2**64


@dataclass(frozen=True)
class ForestConfig:
    """Training hyperparameters.

    ``mtry=None`` means ``ceil(m / 3)``. With ``bootstrap`` on, each tree sees
    ``n`` rows drawn with replacement, or, if ``subsample_fraction`` is set,
    ``round(fraction * n)`` distinct rows drawn without replacement.
    """

    n_trees: int = 100
    mtry: int | None = None
    min_leaf: int = 5
    max_depth: int | None = None
    bootstrap: bool = True
    subsample_fraction: float | None = None
    seed: int = 0

    def validate(self, m: int) -> "ForestConfig":
        """Return a copy with ``mtry`` resolved for embedding length ``m``."""
        mtry = math.ceil(m / 3) if self.mtry is None else int(self.mtry)
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if not 1 <= mtry <= m:
            raise ValueError(f"mtry must lie in [1, {m}], got {mtry}")
        if self.min_leaf < 1:
            raise ValueError(f"min_leaf must be >= 1, got {self.min_leaf}")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError(f"max_depth must be >= 0, got {self.max_depth}")
        if self.subsample_fraction is not None and not 0 < self.subsample_fraction < 1:
            raise ValueError(f"subsample_fraction must lie in (0, 1), got {self.subsample_fraction}")
        if not 0 <= self.seed < _SEED_LIMIT:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        return replace(self, mtry=mtry)


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """Per-tree substream: Philox (counter-based) keyed by a SeedSequence hash
    of ``(seed, tree_index)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(tree_index)])))


def draw_in_bag(n: int, config: ForestConfig, rng: np.random.Generator) -> np.ndarray:
    """Multiplicity of every row in one tree's training sample."""
    if not config.bootstrap:
        return np.ones(n, dtype=np.intp)
    if config.subsample_fraction is None:
        return np.bincount(rng.integers(0, n, size=n), minlength=n).astype(np.intp)
    k = max(1, round(config.subsample_fraction * n))
    counts = np.zeros(n, dtype=np.intp)
    counts[rng.choice(n, size=k, replace=False)] = 1
    return counts


def fingerprint(dataset: EmbeddingDataset) -> str:
    h = hashlib.sha256()
    h.update(f"m={dataset.m};n={len(dataset)};".encode())
    h.update(np.ascontiguousarray(dataset.inputs, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(dataset.targets, dtype="<f8").tobytes())
    return "sha256:" + h.hexdigest()


def train_tree(dataset: EmbeddingDataset, in_bag: np.ndarray, config: ForestConfig, tree_seed) -> RegressionTree:
    """Grow a tree on the row multiset given by ``in_bag`` counts.

    ``tree_seed`` is an int (or anything :class:`numpy.random.SeedSequence`
    accepts) or a ready :class:`numpy.random.Generator`.
    """
    config = config.validate(dataset.m)
    in_bag = np.asarray(in_bag, dtype=np.intp)
    if in_bag.sum() == 0:
        raise ValueError("in-bag sample is empty")
    rng = tree_seed if isinstance(tree_seed, np.random.Generator) else np.random.Generator(
        np.random.Philox(np.random.SeedSequence(tree_seed))
    )
    rows = np.repeat(np.arange(in_bag.size), in_bag)
    tree = grow_tree(dataset.inputs, dataset.targets, rows, config.mtry, config.min_leaf, config.max_depth, rng)
    tree.in_bag_counts = in_bag
    return tree


def _build(dataset: EmbeddingDataset, config: ForestConfig, index: int) -> RegressionTree:
    rng = tree_rng(config.seed, index)
    in_bag = draw_in_bag(len(dataset), config, rng)
    return train_tree(dataset, in_bag, config, rng)


@dataclass(eq=False)
class RandomForestModel:
    """Trained ensemble. Predictions are the unweighted mean over trees."""

    trees: list[RegressionTree]
    config: ForestConfig
    m: int
    oob_rmse: float | None = None
    train_fingerprint: str = ""

    def __post_init__(self):
        if not self.trees:
            raise ValueError("a forest needs at least one tree")
        leaves = np.concatenate([t.leaf_values for t in self.trees])
        # averaging leaf means cannot leave this range except through rounding
        self._lo, self._hi = float(leaves.min()), float(leaves.max())

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.m:
            raise ValueError(f"expected windows of length {self.m}, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("input windows contain non-finite values")
        return X

    def predict(self, X) -> np.ndarray:
        """Mean tree output for each row of ``X`` (shape ``(n, m)``)."""
        X = self._check(X)
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict(X)
        return np.clip(total / len(self.trees), self._lo, self._hi)


def train_forest(dataset: EmbeddingDataset, config: ForestConfig | None = None, n_jobs: int = 1) -> RandomForestModel:
    """Train ``config.n_trees`` trees; tree ``i`` depends only on ``(seed, i)``,
    so the result does not depend on ``n_jobs``."""
    config = (config or ForestConfig()).validate(dataset.m)
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    if n_jobs == 1:
        trees = [_build(dataset, config, i) for i in range(config.n_trees)]
    else:
        trees = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_build)(dataset, config, i) for i in range(config.n_trees)
        )
    model = RandomForestModel(list(trees), config, dataset.m, None, fingerprint(dataset))
    if config.bootstrap:
        try:
            model.oob_rmse = oob_error(model, dataset)
        except ValueError:
            model.oob_rmse = None
    return model


def predict(model: RandomForestModel, x) -> float:
    """Forest prediction for a single window of ``model.m`` values."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D window, got shape {x.shape}")
    return float(model.predict(x)[0])


def oob_error(model: RandomForestModel, dataset: EmbeddingDataset) -> float:
    """RMSE over rows left out by at least one tree, each predicted only by the
    trees that did not see it."""
    if not model.config.bootstrap:
        raise ValueError("out-of-bag error needs a bootstrapped forest")
    n = len(dataset)
    total = np.zeros(n)
    hits = np.zeros(n, dtype=np.intp)
    for tree in model.trees:
        if tree.in_bag_counts is None or tree.in_bag_counts.size != n:
            raise ValueError("tree in-bag record does not match the dataset")
        oob = np.flatnonzero(tree.in_bag_counts == 0)
        if oob.size:
            total[oob] += tree.predict(dataset.inputs[oob])
            hits[oob] += 1
    ok = hits > 0
    if not ok.any():
        raise ValueError("no row is out-of-bag for any tree")
    err = total[ok] / hits[ok] - dataset.targets[ok]
    return math.sqrt(float(np.mean(err * err)))


class RandomForestRegressor(RegressorMixin, BaseEstimator):
    """scikit-learn compatible front end for :func:`train_forest`.

    Fitted attributes: ``model_`` (:class:`RandomForestModel`),
    ``oob_rmse_`` and ``n_features_in_``.
    """

    def __init__(
        self,
        n_trees=100,
        mtry=None,
        min_leaf=5,
        max_depth=None,
        bootstrap=True,
        subsample_fraction=None,
        seed=0,
        n_jobs=1,
    ):
        self.n_trees = n_trees
        self.mtry = mtry
        self.min_leaf = min_leaf
        self.max_depth = max_depth
        self.bootstrap = bootstrap
        self.subsample_fraction = subsample_fraction
        self.seed = seed
        self.n_jobs = n_jobs

    def forest_config(self) -> ForestConfig:
        params = self.get_params()
        params.pop("n_jobs")
        return ForestConfig(**params)

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        dataset = EmbeddingDataset(X.shape[1], X, y)
        self.model_ = train_forest(dataset, self.forest_config(), n_jobs=self.n_jobs)
        self.oob_rmse_ = self.model_.oob_rmse
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        return self.model_.predict(X)

    @classmethod
    def from_model(cls, model: RandomForestModel, n_jobs=1) -> "RandomForestRegressor":
        est = cls(**asdict(model.config), n_jobs=n_jobs)
        est.model_ = model
        est.oob_rmse_ = model.oob_rmse
        est.n_features_in_ = model.m
        return est
