from .ensemble import (
    ForestConfig,
    RandomForestModel,
    RandomForestRegressor,
    draw_in_bag,
    fingerprint,
    oob_error,
    predict,
    train_forest,
    train_tree,
    tree_rng,
)
from .serialize import FORMAT_VERSION, ModelFormatError, load_model, save_model
from .tree import RegressionTree, Split, best_split, grow_tree

__all__ = [
    "FORMAT_VERSION",
    "ForestConfig",
    "ModelFormatError",
    "RandomForestModel",
    "RandomForestRegressor",
    "RegressionTree",
    "Split",
    "best_split",
    "draw_in_bag",
    "fingerprint",
    "grow_tree",
    "load_model",
    "oob_error",
    "predict",
    "save_model",
    "train_forest",
    "train_tree",
    "tree_rng",
]
