"""NSGA-II building blocks: non-dominated sorting, crowding, selection."""
from __future__ import annotations

import math

import numpy as np


def _fit(ind):
    if ind.fitness is None:
        raise ValueError(f"individual {ind.id} has no fitness")
    return ind.fitness


def fast_nondominated_sort(pop) -> list:
    """Partition ``pop`` into fronts; front 0 is the non-dominated set."""
    fits = [_fit(p) for p in pop]
    n = len(pop)
    dominated_by = [[] for _ in range(n)]
    counts = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if fits[i].dominates(fits[j]):
                dominated_by[i].append(j)
                counts[j] += 1
            elif fits[j].dominates(fits[i]):
                dominated_by[j].append(i)
                counts[i] += 1
    current = [i for i in range(n) if counts[i] == 0]
    fronts = []
    while current:
        fronts.append([pop[i] for i in current])
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                counts[j] -= 1
                if counts[j] == 0:
                    nxt.append(j)
        current = sorted(nxt)
    return fronts


def _finite_proxy(values: np.ndarray) -> np.ndarray:
    # +inf sentinels (empty archive) are placed one finite range above the max
    finite = values[np.isfinite(values)]
    if len(finite) == len(values):
        return values
    if len(finite) == 0:
        return np.zeros_like(values)
    span = finite.max() - finite.min()
    return np.where(np.isfinite(values), values, finite.max() + (span if span > 0 else 1.0))


def crowding_distance(front) -> list:
    """Assign and return crowding distances for one front.

    Each neighbour gap is normalised by ``n_objectives * range`` so that an
    evenly spaced interior point scores 1.0 overall.
    """
    n = len(front)
    if n == 0:
        raise ValueError("empty front")
    dist = [0.0] * n
    objs = np.array([[_fit(p).f1, _fit(p).f2] for p in front], dtype=np.float64)
    for k in range(objs.shape[1]):
        vals = _finite_proxy(objs[:, k])
        order = np.argsort(vals, kind="stable")
        dist[order[0]] = math.inf
        dist[order[-1]] = math.inf
        span = (vals[order[-1]] - vals[order[0]]) * objs.shape[1]
        if span <= 0:
            continue
        for pos in range(1, n - 1):
            i = order[pos]
            if dist[i] != math.inf:
                dist[i] += (vals[order[pos + 1]] - vals[order[pos - 1]]) / span
    for p, d in zip(front, dist):
        p.crowding = d
    return dist


def assign_ranks(pop) -> list:
    fronts = fast_nondominated_sort(pop)
    for r, front in enumerate(fronts):
        for p in front:
            p.rank = r
        crowding_distance(front)
    return fronts


def select(pop, popsize: int) -> list:
    """Environmental selection: whole fronts, last one truncated by crowding."""
    fronts = assign_ranks(pop)
    out = []
    for front in fronts:
        if len(out) + len(front) <= popsize:
            out.extend(front)
            continue
        rest = sorted(front, key=lambda p: (-p.crowding, p.id))
        out.extend(rest[: popsize - len(out)])
        break
    return out


def better(a, b, rng):
    """Binary tournament rule: lower rank, then larger crowding, then a coin flip."""
    if a is b:
        return a
    if a.rank != b.rank:
        return a if a.rank < b.rank else b
    if a.crowding != b.crowding:
        return a if a.crowding > b.crowding else b
    return a if rng.random() < 0.5 else b


def sel_tour_dcd(pop, count: int, rng) -> list:
    """``count`` winners of size-2 tournaments (the winners themselves; callers copy)."""
    n = len(pop)
    winners = []
    for _ in range(count):
        i, j = rng.integers(n, size=2)
        winners.append(better(pop[int(i)], pop[int(j)], rng))
    return winners
