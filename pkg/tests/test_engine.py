import json

import numpy as np
import pytest

from toy import ThresholdToy, ToyDomain, instances
from metisforge.harness.data import Split
from metisforge.search.archive import PER_SEED, Archive
from metisforge.search.engine import (
    Evaluator,
    Factory,
    SeedShortfallError,
    build_seed_pool,
    greedy_diverse,
    init_population,
    min_diverse_distance,
    repopulate,
    run_search,
)
from metisforge.search.individual import SearchConfig
from metisforge.search.nsga import assign_ranks

WEAK = Split(np.zeros((2, 1)), np.zeros(2, dtype=np.int64))


class FixedR:
    """Delegates to a Generator but pins the repopulation count draw."""

    def __init__(self, rng, ub, r):
        self.rng, self.ub, self.r = rng, ub, r

    def integers(self, *args, **kw):
        if args == (1, self.ub + 1):
            return self.r
        return self.rng.integers(*args, **kw)

    def __getattr__(self, name):
        return getattr(self.rng, name)


def setup(seeds, originals=(0.0,), mutants=(0.5,) * 5, domain_cls=ToyDomain, popsize=4, rng_seed=0):
    dom = domain_cls(seeds)
    fac = Factory(dom)
    ev = Evaluator(dom, instances(*originals), instances(*mutants))
    rng = np.random.default_rng(rng_seed)
    pool = build_seed_pool(dom, fac, ev, rng, popsize)
    return dom, fac, ev, pool, rng


def test_greedy_collinear_tie_goes_to_lower_id():
    pts = [0.0, 1.0, 2.0]

    class Middle:
        def integers(self, n):
            return 1

    order = greedy_diverse(pts, 2, lambda a, b: abs(a - b), Middle(), ids=["a", "b", "c"])
    assert order == [1, 0]
    order = greedy_diverse(pts, 2, lambda a, b: abs(a - b), Middle(), ids=["z", "b", "c"])
    assert order == [1, 2]


def test_greedy_prefers_far_points():
    pts = [0.0, 0.1, 5.0, 10.0]

    class First:
        def integers(self, n):
            return 0

    assert greedy_diverse(pts, 3, lambda a, b: abs(a - b), First()) == [0, 3, 2]


def test_popsize_one_uniform_first_seed():
    seen = set()
    for s in range(60):
        dom, fac, ev, pool, rng = setup([1.0, 2.0, 3.0], popsize=1, rng_seed=s)
        pop = init_population(pool, fac, 1, rng)
        assert len(pop) == 1
        seen.add(pop[0].seed_origin)
    assert seen == {"t00", "t01", "t02"}


def test_misbehaving_seed_is_filtered():
    for s in range(20):
        dom, fac, ev, pool, rng = setup([-1.0, 1.0, 2.0, 3.0], popsize=3, rng_seed=s)
        pop = init_population(pool, fac, 3, rng)
        assert "t00" not in {p.seed_origin for p in pop}


def test_seed_shortfall_names_the_gap():
    dom, fac, ev, pool, rng = setup([-1.0, 1.0, 2.0], popsize=4)
    with pytest.raises(SeedShortfallError, match="2 more"):
        init_population(pool, fac, 4, rng)


def test_init_individuals_are_mutated_seeds():
    dom, fac, ev, pool, rng = setup([1.0, 2.0, 3.0, 4.0], popsize=4)
    pop = init_population(pool, fac, 4, rng)
    by_id = {s[0]: s[1] for s in pool.items}
    assert all(p.genotype != by_id[p.seed_origin] for p in pop)
    assert len({p.id for p in pop}) == 4


def evaluated_pop(seeds, **kw):
    dom, fac, ev, pool, rng = setup(seeds, **kw)
    pop = init_population(pool, fac, len(seeds), rng)
    ev.evaluate(pop)
    assign_ranks(pop)
    return dom, fac, ev, pool, rng, pop


def test_repopulate_empty_archive_unchanged():
    dom, fac, ev, pool, rng, pop = evaluated_pop([1.0, 2.0, 3.0, 4.0])
    out = repopulate(pop, pool, Archive(PER_SEED), SearchConfig(popsize=4, repop_upper_bound=2), rng, fac)
    assert [p.id for p in out] == [p.id for p in pop]


def nonempty_archive(pop):
    a = Archive(PER_SEED)
    a.entries.append(pop[0])
    return a


def test_repopulate_replaces_misbehaving_then_r():
    seeds = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]
    dom, fac, ev, pool, rng, pop = evaluated_pop(seeds, popsize=8)
    from metisforge.fitness import EvalOutcome

    for p in pop[:3]:
        p.orig_outcomes = [EvalOutcome(False, -1.0)]
    cfg = SearchConfig(popsize=8, repop_upper_bound=4)
    out = repopulate(pop, pool, nonempty_archive(pop), cfg, FixedR(rng, 4, 2), fac)
    assert len(out) == 8
    replaced = [i for i, (a, b) in enumerate(zip(pop, out)) if a is not b]
    assert len(replaced) == 5 and set(replaced) >= {0, 1, 2}


def test_repopulate_count_is_uniform():
    seeds = [float(v) for v in range(1, 13)]
    dom, fac, ev, pool, rng, pop = evaluated_pop(seeds, popsize=12)
    cfg = SearchConfig(popsize=12, repop_upper_bound=10)
    archive = nonempty_archive(pop)
    r = np.random.default_rng(99)
    counts = np.zeros(11)
    trials = 10000
    for _ in range(trials):
        out = repopulate(pop, pool, archive, cfg, r, fac)
        counts[sum(a is not b for a, b in zip(pop, out))] += 1
    assert counts[0] == 0
    assert np.all(np.abs(counts[1:] / trials - 0.1) <= 0.02)


def test_repopulate_replaces_most_dominated():
    seeds = [float(v) for v in range(1, 7)]
    dom, fac, ev, pool, rng, pop = evaluated_pop(seeds, popsize=6)
    worst = max(pop, key=lambda p: (p.rank, -p.crowding, -p.id))
    cfg = SearchConfig(popsize=6, repop_upper_bound=1)
    out = repopulate(pop, pool, nonempty_archive(pop), cfg, rng, fac)
    assert worst not in out


def test_g_max_zero_without_candidates_returns_weak_set():
    dom = ToyDomain([5.0, 6.0, 7.0, 8.0], step=0.1)
    res = run_search(SearchConfig(popsize=4, g_max=0), dom, instances(0.0), instances(0.5), WEAK)
    assert len(res.archive) == 0
    assert res.augmented is WEAK
    assert [r["generation"] for r in res.log] == [0]


def archive_bytes(res):
    return json.dumps([(e.id, e.seed_origin, e.genotype, e.fitness.f1) for e in res.archive], sort_keys=True)


def test_search_finds_killing_inputs_and_is_deterministic():
    cfg = SearchConfig(popsize=6, g_max=30, repop_upper_bound=2, rng_seed=3)
    dom = ToyDomain([0.9, 1.5, 2.0, 2.5, 3.0, 3.5], step=0.4)
    a = run_search(cfg, dom, instances(0.0), instances(0.6, 0.7, 0.8), WEAK)
    b = run_search(cfg, ToyDomain(dom.seeds, step=0.4), instances(0.0), instances(0.6, 0.7, 0.8), WEAK)
    assert len(a.archive) > 0
    assert archive_bytes(a) == archive_bytes(b)
    assert len(a.augmented) == len(WEAK) + len(a.archive)
    assert all(0.0 <= e.genotype < 0.8 for e in a.archive)


def test_generation_invariants_hold_throughout():
    cfg = SearchConfig(popsize=6, g_max=25, repop_upper_bound=3, rng_seed=1, archive_threshold=0.1)
    seen = []

    def hook(rec, pop, archive):
        assert len(pop) == cfg.popsize
        for e in archive:
            assert any(o.correct for o in e.orig_outcomes) and any(not o.correct for o in e.mut_outcomes)
        seen.append({e.seed_origin: e.fitness.f1 for e in archive})

    for dom_cls in (ToyDomain, ThresholdToy):
        seen.clear()
        dom = dom_cls([0.9, 1.5, 2.0, 2.5, 3.0, 3.5])
        res = run_search(cfg, dom, instances(0.0), instances(0.6, 0.8), WEAK, on_generation=hook)
        assert len(seen) == cfg.g_max + 1
        if dom_cls is ToyDomain:
            for before, after in zip(seen, seen[1:]):
                assert all(after[s] <= f for s, f in before.items())
        else:
            ents = res.archive.entries
            assert all(dom.distance(x, y) > 0.1 for i, x in enumerate(ents) for y in ents[i + 1:])


def test_evaluator_memoises_outputs():
    calls = []

    class Counting:
        def forward(self, x):
            calls.append(len(x))
            return np.asarray(x, dtype=float)

    from metisforge.harness.mutation import ModelInstanceSet

    dom = ToyDomain([1.0])
    ev = Evaluator(dom, ModelInstanceSet([Counting()]), ModelInstanceSet([Counting()]))
    fac = Factory(dom)
    a, b = fac.make(1.0, "t00", 0, 0), fac.make(1.0, "t00", 0, 0)
    ev.evaluate([a])
    ev.evaluate([b])
    assert calls == [1, 1]
    assert b.fitness.f1 == a.fitness.f1


def test_min_diverse_distance_is_positive():
    dom = ToyDomain([0.0, 1.0, 3.0, 7.0])
    assert min_diverse_distance(dom, np.random.default_rng(0), size=3, pool=4) == pytest.approx(3.0)
