from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class FitnessPair:
    """``f1`` is minimised, ``f2`` maximised (``inf`` when the archive is empty)."""

    f1: float
    f2: float

    def dominates(self, other: "FitnessPair") -> bool:
        no_worse = self.f1 <= other.f1 and self.f2 >= other.f2
        better = self.f1 < other.f1 or self.f2 > other.f2
        return no_worse and better


@dataclass
class Individual:
    id: int
    genotype: Any
    seed_origin: str
    expected: Any
    phenotype: Any = None
    model_input: Any = None
    orig_outcomes: list | None = None
    mut_outcomes: list | None = None
    fitness: FitnessPair | None = None
    rank: int | None = None
    crowding: float = 0.0
    generation: int = 0

    @property
    def evaluated(self) -> bool:
        return self.mut_outcomes is not None

    def misbehaves_on_all_originals(self) -> bool:
        return not any(o.correct for o in self.orig_outcomes)


@dataclass(frozen=True)
class SearchConfig:
    popsize: int = 24
    g_max: int = 50
    repop_upper_bound: int = 3
    rng_seed: int = 0
    mutation_extent: tuple = (1.0, 3.0)
    archive_threshold: float = 0.55
    tournament_size: int = field(default=2, init=False)

    def __post_init__(self):
        if self.popsize < 2 and self.g_max > 0:
            raise ValueError("popsize must be at least 2")
        if self.popsize < 1:
            raise ValueError("popsize must be positive")
        if self.g_max < 0:
            raise ValueError("g_max must be non-negative")
        if not 1 <= self.repop_upper_bound <= max(self.popsize, 1):
            raise ValueError("repop_upper_bound must lie in [1, popsize]")
        if not math.isfinite(self.archive_threshold) or self.archive_threshold < 0:
            raise ValueError("archive_threshold must be non-negative")
