"""JSON model files.

Layout::

    {"format_version": 1, "m": int, "config": {...}, "oob_rmse": float | null,
     "train_fingerprint": str,
     "trees": [{"feature": [...], "threshold": [...], "left": [...],
                "right": [...], "value": [...], "n_samples": [...],
                "in_bag_counts": [...] | null}, ...]}

Floats are written with Python's shortest round-trip repr, so a loaded model
reproduces predictions bit for bit.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .ensemble import ForestConfig, RandomForestModel
from .tree import RegressionTree

FORMAT_VERSION = 1

_TREE_ARRAYS = (
    ("feature", np.intp),
    ("threshold", np.float64),
    ("left", np.intp),
    ("right", np.intp),
    ("value", np.float64),
    ("n_samples", np.intp),
)


class ModelFormatError(ValueError):
    """Model file is unreadable, corrupted or from another format version."""


def model_to_dict(model: RandomForestModel) -> dict:
    trees = []
    for t in model.trees:
        entry = {name: getattr(t, name).tolist() for name, _ in _TREE_ARRAYS}
        entry["in_bag_counts"] = None if t.in_bag_counts is None else t.in_bag_counts.tolist()
        trees.append(entry)
    return {
        "format_version": FORMAT_VERSION,
        "m": int(model.m),
        "config": asdict(model.config),
        "oob_rmse": model.oob_rmse,
        "train_fingerprint": model.train_fingerprint,
        "trees": trees,
    }


def model_from_dict(doc: dict) -> RandomForestModel:
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise ModelFormatError("not a model document: missing format_version")
    if doc["format_version"] != FORMAT_VERSION:
        raise ModelFormatError(
            f"model format_version {doc['format_version']!r} is not supported (this build reads {FORMAT_VERSION})"
        )
    try:
        known = {f.name for f in fields(ForestConfig)}
        config = ForestConfig(**{k: v for k, v in doc["config"].items() if k in known})
        m = int(doc["m"])
        trees = []
        for entry in doc["trees"]:
            arrays = {name: np.asarray(entry[name], dtype=dtype) for name, dtype in _TREE_ARRAYS}
            sizes = {a.size for a in arrays.values()}
            if len(sizes) != 1 or 0 in sizes:
                raise ModelFormatError("tree arrays have inconsistent lengths")
            n_nodes = sizes.pop()
            feat, left, right = arrays["feature"], arrays["left"], arrays["right"]
            internal = feat >= 0
            if np.any(feat >= m) or np.any(left[internal] >= n_nodes) or np.any(right[internal] >= n_nodes):
                raise ModelFormatError("tree node references out of range")
            if np.any(left[internal] <= np.flatnonzero(internal)) or np.any(right[internal] <= np.flatnonzero(internal)):
                raise ModelFormatError("tree children must follow their parent")
            in_bag = entry.get("in_bag_counts")
            trees.append(RegressionTree(**arrays, in_bag_counts=None if in_bag is None else np.asarray(in_bag, np.intp)))
        oob = doc.get("oob_rmse")
        return RandomForestModel(trees, config, m, None if oob is None else float(oob), str(doc["train_fingerprint"]))
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"corrupted model document: {exc!r}") from exc


def save_model(model: RandomForestModel, path) -> None:
    path = Path(path)
    text = json.dumps(model_to_dict(model), separators=(",", ":"), allow_nan=False)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text + "\n", encoding="utf-8")
    os.replace(tmp, path)


def load_model(path) -> RandomForestModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc.msg} at char {exc.pos})") from exc
    return model_from_dict(doc)
