"""The evolutionary loop: NSGA-II with an archive, novelty and repopulation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..fitness import fitness_f1, fitness_f2
from .archive import Archive
from .individual import FitnessPair, Individual, SearchConfig
from .nsga import select, sel_tour_dcd


class SeedShortfallError(ValueError):
    pass


class Factory:
    """Creates individuals for one run: assigns ids and renders phenotypes."""

    def __init__(self, domain):
        self.domain = domain
        self._next = 0

    def make(self, genotype, seed_origin, seed_expected, generation):
        ind = Individual(self._next, genotype, seed_origin, self.domain.expected(genotype, seed_expected))
        self._next += 1
        ind.phenotype, ind.model_input = self.domain.express(genotype, ind.expected)
        ind.generation = generation
        return ind

    def offspring(self, parent, rng, generation):
        g = self.domain.mutate(parent.genotype, rng)
        return self.make(g, parent.seed_origin, parent.expected, generation)


class Evaluator:
    """Fills in outcomes and f1; model outputs are memoised per input bytes."""

    def __init__(self, domain, originals, mutants):
        self.domain = domain
        self.originals = list(originals.instances)
        self.mutants = list(mutants.instances)
        self._memo = {}

    def outputs(self, inputs):
        keys = [np.asarray(x, dtype=np.float64).tobytes() for x in inputs]
        missing = sorted({k: i for i, k in enumerate(keys) if k not in self._memo}.items(), key=lambda t: t[1])
        if missing:
            x = np.array([inputs[i] for _, i in missing], dtype=np.float64)
            o = [m.forward(x) for m in self.originals]
            u = [m.forward(x) for m in self.mutants]
            for row, (k, _) in enumerate(missing):
                self._memo[k] = ([a[row] for a in o], [a[row] for a in u])
        return [self._memo[k] for k in keys]

    def evaluate(self, inds) -> None:
        todo = [p for p in inds if not p.evaluated]
        if not todo:
            return
        for p, (o, u) in zip(todo, self.outputs([p.model_input for p in todo])):
            p.orig_outcomes = [self.domain.outcome(r, p.expected) for r in o]
            p.mut_outcomes = [self.domain.outcome(r, p.expected) for r in u]
            p.fitness = FitnessPair(fitness_f1(p.mut_outcomes), math.inf)

    def correct_on_originals(self, renders) -> list:
        """Indices of rendered seeds every original instance handles correctly."""
        outs = self.outputs([r.model_input for r in renders])
        return [i for i, (r, (o, _)) in enumerate(zip(renders, outs))
                if all(self.domain.outcome(row, r.expected).correct for row in o)]


def refresh_sparseness(inds, archive, dist) -> None:
    for p in inds:
        p.fitness = FitnessPair(p.fitness.f1, fitness_f2(p, archive.entries, dist))


def greedy_diverse(points, count, dist, rng, ids=None) -> list:
    """Greedy farthest-point order: a random first pick, then the point whose
    nearest selected neighbour is farthest (ties to the lowest id)."""
    n = len(points)
    if count > n:
        raise SeedShortfallError(f"need {count} seeds, only {n} available")
    if count == 0:
        return []
    ids = list(range(n)) if ids is None else list(ids)
    by_id = sorted(range(n), key=lambda i: ids[i])
    chosen = [int(rng.integers(n))]
    nearest = [dist(points[i], points[chosen[0]]) for i in range(n)]
    while len(chosen) < count:
        # max() keeps the first maximum, and candidates are visited in id order
        best = max((i for i in by_id if i not in chosen), key=lambda i: nearest[i])
        chosen.append(best)
        for i in range(n):
            nearest[i] = min(nearest[i], dist(points[i], points[best]))
    return chosen


@dataclass
class SeedPool:
    """Seeds that all original instances handle correctly, as Individuals."""

    items: list
    renders: list

    def __len__(self):
        return len(self.items)


def build_seed_pool(domain, factory, evaluator, rng, popsize) -> SeedPool:
    items = domain.seed_items(rng, popsize)
    if not items:
        raise SeedShortfallError("seed corpus is empty")
    renders = []
    for sid, g, e in items:
        exp = domain.expected(g, e)
        ph, x = domain.express(g, exp)
        renders.append(Individual(-1, g, sid, exp, ph, x))
    keep = evaluator.correct_on_originals(renders)
    return SeedPool([items[i] for i in keep], [renders[i] for i in keep])


def init_population(pool: SeedPool, factory: Factory, popsize: int, rng) -> list:
    if len(pool) < popsize:
        raise SeedShortfallError(
            f"only {len(pool)} seeds behave correctly on the originals; popsize {popsize} needs "
            f"{popsize - len(pool)} more"
        )
    order = greedy_diverse(pool.renders, popsize, factory.domain.distance, rng, ids=[i[0] for i in pool.items])
    pop = []
    for i in order:
        sid, g, e = pool.items[i]
        pop.append(factory.make(factory.domain.mutate(g, rng), sid, e, 0))
    return pop


def fresh_individual(pool: SeedPool, factory: Factory, rng, generation: int):
    sid, g, e = pool.items[int(rng.integers(len(pool)))]
    return factory.make(factory.domain.mutate(g, rng), sid, e, generation)


def most_dominated_order(pop) -> list:
    """Indices from most to least dominated: highest rank, lowest crowding, lowest id."""
    return sorted(range(len(pop)), key=lambda i: (-pop[i].rank, pop[i].crowding, pop[i].id))


def repopulate(pop, pool: SeedPool, archive: Archive, cfg: SearchConfig, rng, factory: Factory, generation: int = 0):
    """Replace members that fail every original, then the ``r`` most dominated."""
    if not archive:
        return list(pop)
    out = list(pop)
    replaced = set()
    for i, p in enumerate(out):
        if p.misbehaves_on_all_originals():
            replaced.add(i)
    r = int(rng.integers(1, cfg.repop_upper_bound + 1))
    extra = [i for i in most_dominated_order(out) if i not in replaced][:r]
    replaced.update(extra)
    for i in sorted(replaced):
        out[i] = fresh_individual(pool, factory, rng, generation)
    return out


@dataclass
class SearchResult:
    augmented: object
    archive: Archive
    log: list = field(default_factory=list)
    population: list = field(default_factory=list)
    seed_pool_size: int = 0


def _log_record(gen, pop, archive):
    f1 = [p.fitness.f1 for p in pop]
    return {
        "generation": gen,
        "best_f1": float(min(f1)),
        "mean_f1": float(math.fsum(f1) / len(f1)),
        "archive_size": len(archive),
        "archive_min_f1": None if not archive else float(archive.min_f1()),
    }


def run_search(cfg: SearchConfig, domain, originals, mutants, weak_test_set, on_generation=None) -> SearchResult:
    """One seeded run of the evolutionary loop; returns ``weak_test_set`` plus archive inputs.

    ``on_generation(record, population, archive)`` is called after every
    environmental selection, starting with the initial population.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    factory = Factory(domain)
    evaluator = Evaluator(domain, originals, mutants)
    archive = Archive(domain.policy, cfg.archive_threshold, domain.distance)
    dist = domain.distance

    pool = build_seed_pool(domain, factory, evaluator, rng, cfg.popsize)
    pop = init_population(pool, factory, cfg.popsize, rng)
    evaluator.evaluate(pop)
    refresh_sparseness(pop, archive, dist)
    archive.update(pop)
    pop = select(pop, cfg.popsize)
    log = [_log_record(0, pop, archive)]
    if on_generation:
        on_generation(log[-1], pop, archive)

    for g in range(1, cfg.g_max + 1):
        parents = sel_tour_dcd(pop, cfg.popsize, rng)
        pop = repopulate(pop, pool, archive, cfg, rng, factory, g)
        offspring = [factory.offspring(p, rng, g) for p in parents]
        union = pop + offspring
        evaluator.evaluate(union)
        refresh_sparseness(union, archive, dist)
        archive.update(union)
        pop = select(union, cfg.popsize)
        log.append(_log_record(g, pop, archive))
        if on_generation:
            on_generation(log[-1], pop, archive)

    extra = domain.test_rows(archive.entries)
    augmented = weak_test_set.concat(extra) if len(extra) else weak_test_set
    return SearchResult(augmented, archive, log, pop, len(pool))


def min_diverse_distance(domain, rng, size: int = 40, pool: int = 160) -> float:
    """Smallest pairwise distance among ``size`` greedily diversified samples.

    First step of choosing an archive threshold: a threshold above this value
    lets such a diverse set enter the archive without local competition.
    """
    items = domain.seed_items(rng, pool)[:pool]
    rend = []
    for sid, g, e in items:
        exp = domain.expected(g, e)
        ph, x = domain.express(g, exp)
        rend.append(Individual(-1, g, sid, exp, ph, x))
    chosen = [rend[i] for i in greedy_diverse(rend, min(size, len(rend)), domain.distance, rng)]
    return min(domain.distance(a, b) for i, a in enumerate(chosen) for b in chosen[i + 1:])
