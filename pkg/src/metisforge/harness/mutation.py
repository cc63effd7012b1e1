"""Source-level mutation operators applied before training, and instance sets."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, Split
from .model import ACTIVATIONS, INITS, N_CLASSES, TrainingError, TrainSpec, train, with_seed

DATA_OPS = ("TCL", "TRD", "TUD", "TAN", "TCO")
CLASSIFICATION_ONLY = ("TCL", "TUD", "TCO")
CONTINUOUS_OPS = DATA_OPS + ("HLR", "HNE")
DISCRETE_OPS = ("ACH", "ARM", "WCI")
OPERATORS = CONTINUOUS_OPS + DISCRETE_OPS
MAX_FRACTION = 0.99


class MutationError(ValueError):
    pass


@dataclass(frozen=True)
class MutationSpec:
    """One configured mutation.

    ``param`` is the fraction of affected rows for data operators, the new
    learning rate for HLR and the new epoch count for HNE. Layer operators
    use ``layer`` and, for ACH/WCI, ``choice`` (activation or initialiser).
    ``label`` is the target class of TCL/TUD/TCO; ``other`` the class TCO
    blends towards.
    """

    operator: str
    param: float | None = None
    layer: int | None = None
    choice: str | None = None
    label: int = 0
    other: int | None = None

    def __post_init__(self):
        if self.operator not in OPERATORS:
            raise MutationError(f"unknown mutation operator {self.operator!r}")
        if self.operator in DATA_OPS:
            if self.param is None or not 0.0 <= self.param <= MAX_FRACTION:
                raise MutationError(
                    f"{self.operator}: percentage {self.param} outside [0, {MAX_FRACTION}]"
                    " (cannot delete all training data)"
                )
        elif self.operator == "HLR" and not (self.param and self.param > 0):
            raise MutationError("HLR needs a positive learning rate")
        elif self.operator == "HNE" and (self.param is None or int(self.param) < 1):
            raise MutationError("HNE needs at least one epoch")
        elif self.operator in DISCRETE_OPS:
            if self.layer is None:
                raise MutationError(f"{self.operator} needs a layer index")
            if self.operator == "ACH" and self.choice not in ACTIVATIONS:
                raise MutationError(f"ACH activation must be one of {ACTIVATIONS}")
            if self.operator == "WCI" and self.choice not in INITS:
                raise MutationError(f"WCI initialiser must be one of {INITS}")

    @property
    def kind(self) -> str:
        return "continuous" if self.operator in CONTINUOUS_OPS else "discrete"

    @property
    def aggressiveness_direction(self) -> str:
        return "decreasing" if self.operator in ("HLR", "HNE") else "increasing"

    def key(self) -> str:
        if self.kind == "continuous":
            return f"{self.operator}({self.param:.6g})"
        parts = [f"l{self.layer}"] + ([self.choice] if self.choice else [])
        return f"{self.operator}({'; '.join(parts)})"

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "MutationSpec":
        return cls(**d)


def _count(p: float, eligible: int) -> int:
    # round half up on the eligible row count
    return int(math.floor(p * eligible + 0.5))


def apply_mutation(ds: Dataset, spec: TrainSpec, mu: MutationSpec, rng) -> tuple:
    """Return the mutated ``(dataset, train spec)``; the test split is shared untouched."""
    op = mu.operator
    if op in CLASSIFICATION_ONLY and ds.task != "classification":
        raise MutationError(f"{op} applies to classification subjects only")
    x, y = ds.train.x, ds.train.y
    if op in DATA_OPS:
        if op in ("TCL", "TUD", "TCO"):
            eligible = np.flatnonzero(y.astype(int) == mu.label)
        else:
            eligible = np.arange(len(x))
        chosen = eligible[rng.permutation(len(eligible))[: _count(mu.param, len(eligible))]]
        if op == "TRD" or op == "TUD":
            keep = np.setdiff1d(np.arange(len(x)), chosen)
            train_split = ds.train.take(keep)
        elif op == "TCL":
            y2 = y.copy()
            y2[chosen] = (mu.label + rng.integers(1, N_CLASSES, len(chosen))) % N_CLASSES
            train_split = Split(x, y2)
        elif op == "TAN":
            sigma = 0.1 * x.std(axis=0)
            x2 = x.copy()
            x2[chosen] += rng.normal(0.0, 1.0, (len(chosen), x.shape[1])) * sigma
            train_split = Split(x2, y)
        else:  # TCO
            other = (mu.label + 1) % N_CLASSES if mu.other is None else mu.other
            pool = np.flatnonzero(y.astype(int) == other)
            if len(pool) == 0:
                raise MutationError(f"TCO: no training rows of class {other}")
            partners = pool[rng.integers(len(pool), size=len(chosen))]
            x2 = x.copy()
            x2[chosen] = 0.5 * x[chosen] + 0.5 * x[partners]
            train_split = Split(x2, y)
        return replace(ds, train=train_split), spec
    n_layers = len(spec.hidden_sizes)
    if op == "HLR":
        return ds, replace(spec, learning_rate=float(mu.param))
    if op == "HNE":
        return ds, replace(spec, epochs=int(mu.param))
    if op in ("ACH", "ARM"):
        if not 0 <= mu.layer < n_layers:
            raise MutationError(f"{op}: invalid hidden layer index {mu.layer}")
        acts = list(spec.activations)
        acts[mu.layer] = "linear" if op == "ARM" else mu.choice
        return ds, replace(spec, activations=tuple(acts))
    # WCI
    if not 0 <= mu.layer <= n_layers:
        raise MutationError(f"WCI: invalid layer index {mu.layer}")
    inits = list(spec.weight_init)
    inits[mu.layer] = mu.choice
    return ds, replace(spec, weight_init=tuple(inits))


@dataclass
class ModelInstanceSet:
    instances: list
    origin: MutationSpec | None = None

    @property
    def n(self) -> int:
        return len(self.instances)

    @property
    def is_original(self) -> bool:
        return self.origin is None

    def head(self, k: int) -> "ModelInstanceSet":
        return ModelInstanceSet(self.instances[:k], self.origin)

    def fingerprints(self) -> list:
        return [m.digest() for m in self.instances]


def train_instance(ds: Dataset, spec: TrainSpec, mu: MutationSpec | None, seed: int):
    if mu is not None:
        ds, spec = apply_mutation(ds, spec, mu, np.random.default_rng(seed))
    return train(ds.train.x, ds.train.y, with_seed(spec, seed))


def build_instances(ds: Dataset, spec: TrainSpec, mu: MutationSpec | None, n: int,
                    base_seed: int = 0) -> ModelInstanceSet:
    """Train ``n`` instances; instance ``k`` uses seed ``base_seed + k`` for
    both the mutation sampling and the training."""
    if n < 1:
        raise ValueError("need at least one instance")
    out = []
    for k in range(n):
        try:
            out.append(train_instance(ds, spec, mu, base_seed + k))
        except TrainingError as exc:
            raise TrainingError(f"instance {k}: {exc}") from exc
    return ModelInstanceSet(out, mu)
