"""Archive of mutant-killing inputs with local competition on f1."""
from __future__ import annotations

import math

from ..fitness import is_solution_candidate

PER_SEED = "per_seed"
THRESHOLD = "threshold"


class Archive:
    """Best solutions found so far.

    ``per_seed``: one entry per seed origin. ``threshold``: a candidate
    farther than ``threshold`` from every entry is added, otherwise it
    competes with its nearest neighbour. A threshold replacement is only
    made when the newcomer also keeps its distance to all other entries, so
    entries stay pairwise farther apart than ``threshold``.
    """

    def __init__(self, policy: str, threshold: float = 0.0, dist=None):
        if policy not in (PER_SEED, THRESHOLD):
            raise ValueError(f"unknown archive policy {policy!r}")
        if policy == THRESHOLD and dist is None:
            raise ValueError("threshold archive needs a distance")
        self.policy = policy
        self.threshold = threshold
        self.dist = dist
        self.entries = []

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __bool__(self):
        return bool(self.entries)

    def update(self, candidates) -> int:
        """Offer evaluated individuals; returns how many entries changed."""
        changed = 0
        for c in candidates:
            if not is_solution_candidate(c.orig_outcomes, c.mut_outcomes):
                continue
            if any(e is c or e.id == c.id for e in self.entries):
                continue
            if self.policy == PER_SEED:
                changed += self._offer_per_seed(c)
            else:
                changed += self._offer_threshold(c)
        return changed

    def _offer_per_seed(self, c) -> int:
        for i, e in enumerate(self.entries):
            if e.seed_origin == c.seed_origin:
                if c.fitness.f1 < e.fitness.f1:
                    self.entries[i] = c
                    return 1
                return 0
        self.entries.append(c)
        return 1

    def _offer_threshold(self, c) -> int:
        if not self.entries:
            self.entries.append(c)
            return 1
        dists = [self.dist(c, e) for e in self.entries]
        nn = min(range(len(dists)), key=lambda i: (dists[i], i))
        if dists[nn] > self.threshold:
            self.entries.append(c)
            return 1
        if c.fitness.f1 < self.entries[nn].fitness.f1 and all(
            d > self.threshold for i, d in enumerate(dists) if i != nn
        ):
            self.entries[nn] = c
            return 1
        return 0

    def min_f1(self) -> float:
        return min((e.fitness.f1 for e in self.entries), default=math.inf)
