"""Operator-configuration search and mutation score.

Continuous operators are searched on an aggressiveness axis where larger
values are always more aggressive; callers map that axis to the operator
parameter (see ``metisforge.cli.operators``).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

log = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.01


class UndefinedScoreError(ValueError):
    pass


@dataclass
class OperatorSearchResult:
    operator: str
    kind: str
    range: tuple = (0.0, 0.99)
    epsilon: float = DEFAULT_EPSILON
    boundary: float | None = None
    killed_set: list = field(default_factory=list)
    values: list = field(default_factory=list)
    never_killed: bool = False
    all_killed: bool = False
    probes: list = field(default_factory=list)

    @property
    def killed_length(self) -> float:
        """Measure of the killed region on the aggressiveness axis."""
        if self.never_killed:
            return 0.0
        return self.range[1] - self.boundary

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "kind": self.kind,
            "range": list(self.range),
            "epsilon": self.epsilon,
            "boundary": self.boundary,
            "killed_set": list(self.killed_set),
            "values": list(self.values),
            "never_killed": self.never_killed,
            "all_killed": self.all_killed,
            "probes": [list(p) for p in self.probes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OperatorSearchResult":
        d = dict(d)
        d["range"] = tuple(d["range"])
        d["probes"] = [tuple(p) for p in d.get("probes", [])]
        return cls(**d)


def binary_search_config(operator: str, oracle, range=(0.0, 0.99), epsilon=DEFAULT_EPSILON) -> OperatorSearchResult:
    """Locate the least aggressive killed configuration by bisection.

    The most aggressive value is probed first; if it survives the whole
    range counts as not killed. Otherwise the interval is halved until its
    width is at most ``epsilon`` and the last observed survivor is returned
    as the boundary. When no probe survives, ``lo`` itself is probed: a
    killed ``lo`` sets ``all_killed``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    lo, hi = float(range[0]), float(range[1])
    if not lo < hi:
        raise ValueError("range must satisfy lo < hi")
    res = OperatorSearchResult(operator, "continuous", (lo, hi), epsilon)

    def probe(v):
        try:
            k = bool(oracle(v))
        except Exception as exc:
            raise RuntimeError(f"{operator}: oracle failed at {v!r}: {exc}") from exc
        res.probes.append((v, k))
        return k

    if not probe(hi):
        res.never_killed = True
        return res
    a, b = lo, hi
    survivor = None
    while b - a > epsilon:
        mid = (a + b) / 2.0
        if probe(mid):
            if survivor is not None and mid < survivor:
                log.warning("%s: killed at %.4g below survivor %.4g; oracle not monotone", operator, mid, survivor)
            b = mid
        else:
            a = mid
            survivor = mid
    if survivor is None:
        if probe(lo):
            res.all_killed = True
        res.boundary = lo
    else:
        res.boundary = survivor
    return res


def exhaustive_search(operator: str, values, oracle) -> OperatorSearchResult:
    values = list(values)
    if not values:
        raise ValueError("exhaustive search needs at least one value")
    res = OperatorSearchResult(operator, "discrete", range=(0, len(values)), epsilon=0.0, values=values)
    for v in values:
        try:
            k = bool(oracle(v))
        except Exception as exc:
            raise RuntimeError(f"{operator}: oracle failed at {v!r}: {exc}") from exc
        res.probes.append((v, k))
        if k:
            res.killed_set.append(v)
    res.never_killed = not res.killed_set
    return res


def likely_equivalent(train_oracle, config) -> bool:
    """A configuration the training data cannot kill is likely equivalent."""
    return not bool(train_oracle(config))


def mutation_score(test: OperatorSearchResult, train: OperatorSearchResult) -> float:
    """Killed-by-both over killed-by-train, on the aggressiveness axis or as sets."""
    if test.operator != train.operator or test.kind != train.kind:
        raise ValueError("mutation score needs results for the same operator")
    if train.kind == "discrete":
        if not train.killed_set:
            raise UndefinedScoreError("operator likely equivalent; MS undefined")
        tr = {_hashable(v) for v in train.killed_set}
        ts = {_hashable(v) for v in test.killed_set}
        return len(tr & ts) / len(tr)
    if tuple(test.range) != tuple(train.range):
        raise ValueError("mutation score needs the same parameter range")
    if train.never_killed or train.killed_length <= 0:
        raise UndefinedScoreError("operator likely equivalent; MS undefined")
    if test.never_killed:
        return 0.0
    hi = train.range[1]
    both = hi - max(test.boundary, train.boundary)
    return max(0.0, min(1.0, both / train.killed_length))


def _hashable(v):
    if isinstance(v, dict):
        return tuple(sorted((k, _hashable(x)) for k, x in v.items()))
    return tuple(v) if isinstance(v, list) else v


def killing_probability(entries, kind: str) -> float:
    """Mean MS over runs (continuous) or fraction of runs killed (discrete)."""
    entries = list(entries)
    if not entries:
        raise ValueError("need at least one run")
    if kind == "discrete":
        return sum(1.0 for e in entries if e) / len(entries)
    return float(math.fsum(entries) / len(entries))
