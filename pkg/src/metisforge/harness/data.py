"""Datasets, quality metrics and weak test-set construction."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from ..eyes import angular_error

DATASET_SCHEMA = "metisforge-dataset/1"
REGRESSION_TOLERANCE = math.radians(5.0)


@dataclass(frozen=True)
class Split:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y)
        if len(x) != len(y):
            raise ValueError("inputs and targets are not aligned")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.x)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.x).tobytes())
        h.update(np.ascontiguousarray(self.y).tobytes())
        return h.hexdigest()

    def take(self, idx) -> "Split":
        idx = np.asarray(idx, dtype=np.int64)
        return Split(self.x[idx], self.y[idx])

    def concat(self, other: "Split") -> "Split":
        if len(other) == 0:
            return self
        if len(self) == 0:
            return other
        return Split(np.vstack([self.x, other.x]), np.concatenate([self.y, other.y]))


@dataclass(frozen=True)
class Dataset:
    train: Split
    test: Split
    task: str
    name: str = ""

    @property
    def input_dim(self) -> int:
        return self.train.x.shape[1]


def save_dataset(ds: Dataset, path) -> None:
    header = {
        "schema": DATASET_SCHEMA,
        "task": ds.task,
        "name": ds.name,
        "input_dim": ds.input_dim,
        "n_train": len(ds.train),
        "n_test": len(ds.test),
        "fields": {"x": "float64 rows", "y": "class label" if ds.task == "classification" else "pitch, yaw (rad)"},
    }
    with open(path, "wb") as fh:
        np.savez_compressed(
            fh,
            header=np.array(json.dumps(header, sort_keys=True)),
            x_train=ds.train.x, y_train=ds.train.y, x_test=ds.test.x, y_test=ds.test.y,
        )


def load_dataset(path) -> Dataset:
    with np.load(path, allow_pickle=False) as z:
        header = json.loads(str(z["header"]))
        if header.get("schema") != DATASET_SCHEMA:
            raise ValueError(f"{path}: unknown dataset schema {header.get('schema')!r}")
        ds = Dataset(Split(z["x_train"], z["y_train"]), Split(z["x_test"], z["y_test"]),
                     header["task"], header.get("name", ""))
    if ds.input_dim != header["input_dim"] or len(ds.train) != header["n_train"]:
        raise ValueError(f"{path}: header does not match arrays")
    return ds


def shipped_dataset(name: str) -> Dataset:
    """Load one of the packaged desk datasets: ``digits`` or ``regression``."""
    ref = resources.files("metisforge").joinpath(f"data/{name}_desk.npz")
    with resources.as_file(ref) as p:
        return load_dataset(p)


def angular_errors(pred, truth) -> np.ndarray:
    return np.array([angular_error(p, t) for p, t in zip(pred, truth)])


def quality_metric(model, split: Split, tolerance: float = REGRESSION_TOLERANCE) -> float:
    """Accuracy, or for regression the fraction within the angular tolerance."""
    if len(split) == 0:
        raise ValueError("empty test split")
    out = model.forward(split.x)
    if model.spec.task == "classification":
        return float(np.mean(np.argmax(out, axis=1) == split.y.astype(int)))
    return float(np.mean(angular_errors(out, split.y) <= tolerance))


def mean_angular_error(model, split: Split) -> float:
    return float(np.mean(angular_errors(model.forward(split.x), split.y)))


def derive_weak_test_set(test: Split, originals, task: str, threshold: float = 1 - 1e-6,
                         fraction: float = 0.5, all_instances: bool = False) -> Split:
    """Drop the most discriminating inputs from ``test``.

    Classification keeps inputs whose predicted-class confidence reaches
    ``threshold`` (first instance only unless ``all_instances``, then every
    instance must reach it). Regression removes the ``fraction`` of inputs
    with the smallest spread of squared error across all instances.
    """
    models = list(getattr(originals, "instances", originals))
    if task == "classification":
        use = models if all_instances else models[:1]
        conf = np.min([m.forward(test.x).max(axis=1) for m in use], axis=0)
        keep = np.flatnonzero(conf >= threshold)
    else:
        errs = np.array([angular_errors(m.forward(test.x), test.y) ** 2 for m in models])
        spread = errs.std(axis=0)
        order = np.argsort(spread, kind="stable")
        n_drop = int(math.floor(fraction * len(test) + 0.5))
        keep = np.sort(order[n_drop:])
    if len(keep) == 0:
        raise ValueError("weak test set is empty; loosen the weakness threshold")
    return test.take(keep)
