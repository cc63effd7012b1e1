"""Kill oracles over trained instance sets, and operator families.

A continuous family is searched on an aggressiveness axis ``s`` in its
range; larger ``s`` is always more aggressive. Data operators use ``s`` as
the affected fraction directly, HLR scales the learning rate by ``1 - s``
and HNE the epoch count (rounded, at least one epoch).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from ..harness.data import Split, quality_metric
from ..harness.model import ACTIVATIONS, INITS, TrainSpec, load_model, save_model
from ..harness.mutation import CONTINUOUS_OPS, OPERATORS, MutationSpec, ModelInstanceSet, build_instances
from .configsearch import OperatorSearchResult, binary_search_config, exhaustive_search
from .stats import KillOutcome, is_killed


@dataclass(frozen=True)
class OperatorFamily:
    operator: str
    range: tuple = (0.0, 0.99)
    epsilon: float = 0.01
    label: int = 0
    other: int | None = None

    def __post_init__(self):
        if self.operator not in OPERATORS:
            raise ValueError(f"unknown mutation operator {self.operator!r}")
        lo, hi = self.range
        if not 0.0 <= lo < hi <= 0.99:
            raise ValueError(f"{self.operator}: range must satisfy 0 <= lo < hi <= 0.99")
        if not self.epsilon > 0:
            raise ValueError(f"{self.operator}: epsilon must be positive")

    @property
    def kind(self) -> str:
        return "continuous" if self.operator in CONTINUOUS_OPS else "discrete"

    def at(self, s: float, base: TrainSpec) -> MutationSpec:
        """The concrete mutation at aggressiveness ``s``."""
        if self.operator == "HLR":
            return MutationSpec("HLR", base.learning_rate * (1.0 - s))
        if self.operator == "HNE":
            return MutationSpec("HNE", max(1, int(round(base.epochs * (1.0 - s)))))
        return MutationSpec(self.operator, float(s), label=self.label, other=self.other)

    def values(self, base: TrainSpec) -> list:
        """Every discrete configuration that differs from ``base``."""
        op = self.operator
        out = []
        if op == "ACH":
            for i, a in enumerate(base.activations):
                out += [MutationSpec(op, layer=i, choice=c) for c in ACTIVATIONS if c != a]
        elif op == "ARM":
            out = [MutationSpec(op, layer=i) for i, a in enumerate(base.activations) if a != "linear"]
        elif op == "WCI":
            for i, w in enumerate(base.weight_init):
                out += [MutationSpec(op, layer=i, choice=c) for c in INITS if c != w]
        else:
            raise ValueError(f"{op} is continuous")
        return out

    def to_dict(self) -> dict:
        d = {"operator": self.operator, "range": list(self.range), "epsilon": self.epsilon, "label": self.label}
        if self.other is not None:
            d["other"] = self.other
        return d


class InstanceCache:
    """Trained instance sets keyed by mutation, optionally mirrored on disk."""

    def __init__(self, ds, spec: TrainSpec, n: int, base_seed: int = 0, root=None):
        self.ds = ds
        self.spec = spec
        self.n = n
        self.base_seed = base_seed
        self.root = Path(root) if root is not None else None
        self._mem = {}
        self.trained = 0

    def key(self, mu: MutationSpec | None) -> str:
        payload = {
            "spec": self.spec.spec_hash().hex(),
            "data": self.ds.train.digest(),
            "n": self.n,
            "base_seed": self.base_seed,
            "mutation": None if mu is None else mu.to_dict(),
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:20]

    def get(self, mu: MutationSpec | None) -> ModelInstanceSet:
        k = self.key(mu)
        if k in self._mem:
            return self._mem[k]
        inst = self._load(k, mu)
        if inst is None:
            inst = build_instances(self.ds, self.spec, mu, self.n, self.base_seed)
            self.trained += self.n
            self._store(k, inst)
        self._mem[k] = inst
        return inst

    def put(self, mu: MutationSpec | None, inst: ModelInstanceSet) -> None:
        """Register an already trained set (memory only)."""
        if inst.n != self.n:
            raise ValueError(f"expected {self.n} instances, got {inst.n}")
        self._mem[self.key(mu)] = inst

    def _dir(self, k):
        return self.root / k

    def _load(self, k, mu):
        if self.root is None:
            return None
        d = self._dir(k)
        files = [d / f"instance_{i:02d}.mfm" for i in range(self.n)]
        if not all(f.exists() for f in files):
            return None
        return ModelInstanceSet([load_model(f) for f in files], mu)

    def _store(self, k, inst):
        if self.root is None:
            return
        d = self._dir(k)
        d.mkdir(parents=True, exist_ok=True)
        for i, m in enumerate(inst.instances):
            save_model(m, d / f"instance_{i:02d}.mfm")
        meta = {"mutation": None if inst.origin is None else inst.origin.to_dict(), "n": self.n}
        (d / "meta.json").write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n")


def metrics(inst: ModelInstanceSet, split: Split) -> list:
    return [quality_metric(m, split) for m in inst.instances]


class KillOracle:
    """Does ``split`` kill a mutation? Compares all n originals with n mutants."""

    def __init__(self, cache: InstanceCache, split: Split, paired: bool = False):
        self.cache = cache
        self.split = split
        self.paired = paired
        self.orig = metrics(cache.get(None), split)
        self.log = []

    def outcome(self, mu: MutationSpec) -> KillOutcome:
        out = is_killed(self.orig, metrics(self.cache.get(mu), self.split), paired=self.paired)
        self.log.append((mu.key(), out))
        return out

    def __call__(self, mu: MutationSpec) -> bool:
        return self.outcome(mu).killed


def search_family(fam: OperatorFamily, oracle: KillOracle, base: TrainSpec) -> OperatorSearchResult:
    if fam.kind == "continuous":
        return binary_search_config(fam.operator, lambda s: oracle(fam.at(s, base)), fam.range, fam.epsilon)
    values = fam.values(base)
    res = exhaustive_search(fam.operator, [mu.to_dict() for mu in values], lambda d: oracle(MutationSpec.from_dict(d)))
    return res
