import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metisforge.fitness import EvalOutcome, fitness_f2
from metisforge.search.archive import PER_SEED, THRESHOLD, Archive
from metisforge.search.individual import FitnessPair, Individual

OK, BAD = EvalOutcome(True, 0.5), EvalOutcome(False, -1.0)


def cand(i, f1, seed="s0", pos=0.0, orig=(OK,), mut=(BAD,)):
    p = Individual(i, None, seed, 0, phenotype=np.array([pos]))
    p.orig_outcomes, p.mut_outcomes = list(orig), list(mut)
    p.fitness = FitnessPair(f1, float("inf"))
    return p


def dist(a, b):
    return float(np.abs(a.phenotype - b.phenotype).sum())


def test_non_candidate_rejected():
    a = Archive(PER_SEED)
    assert a.update([cand(0, -1.0, orig=(BAD,))]) == 0
    assert a.update([cand(1, 0.5, mut=(OK,))]) == 0
    assert len(a) == 0


def test_per_seed_lower_f1_wins_and_ties_keep_incumbent():
    a = Archive(PER_SEED)
    inc = cand(0, 0.4)
    a.update([inc])
    a.update([cand(1, 0.4)])
    assert a.entries == [inc]
    a.update([cand(2, -0.2)])
    assert [e.id for e in a] == [2]
    a.update([cand(3, 0.1, seed="s1")])
    assert sorted(e.seed_origin for e in a) == ["s0", "s1"]


def test_threshold_insert_far_candidate():
    a = Archive(THRESHOLD, 0.55, dist)
    a.update([cand(0, 0.0, pos=0.0), cand(1, 0.0, pos=1.0)])
    a.update([cand(2, 0.0, pos=0.4 + 0.6 + 0.6)])
    assert len(a) == 3
    ents = a.entries
    assert all(dist(x, y) > 0.55 for i, x in enumerate(ents) for y in ents[i + 1:])


def test_threshold_competes_with_nearest():
    a = Archive(THRESHOLD, 0.55, dist)
    a.update([cand(0, 0.3, pos=0.0)])
    a.update([cand(1, 0.5, pos=0.2)])
    assert [e.id for e in a] == [0]
    a.update([cand(2, -0.5, pos=0.2)])
    assert [e.id for e in a] == [2]


def test_threshold_replacement_guard_keeps_invariant():
    a = Archive(THRESHOLD, 0.5, dist)
    a.update([cand(0, 0.0, pos=0.0), cand(1, 0.0, pos=0.6)])
    # nearest is entry 0 but the newcomer would sit within t_a of entry 1
    a.update([cand(2, -1.0, pos=0.25)])
    assert sorted(e.id for e in a) == [0, 1]


def test_threshold_requires_distance():
    with pytest.raises(ValueError):
        Archive(THRESHOLD, 0.5)
    with pytest.raises(ValueError):
        Archive("other")


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-1, 1), st.booleans(), st.booleans()), max_size=40),
       st.floats(0.0, 1.0))
def test_threshold_invariants(items, t_a):
    a = Archive(THRESHOLD, t_a, dist)
    best_seen = []
    for i, (pos, f1, ok, bad) in enumerate(items):
        a.update([cand(i, f1, pos=pos, orig=(OK if ok else BAD,), mut=(BAD if bad else OK,))])
        ents = a.entries
        assert all(dist(x, y) > t_a for j, x in enumerate(ents) for y in ents[j + 1:])
        assert all(any(o.correct for o in e.orig_outcomes) and any(not o.correct for o in e.mut_outcomes)
                   for e in ents)
        best_seen.append(a.min_f1())
    assert all(b2 <= b1 for b1, b2 in zip(best_seen, best_seen[1:]))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.floats(-1, 1)), max_size=40))
def test_per_seed_invariants(items):
    a = Archive(PER_SEED)
    best = {}
    for i, (s, f1) in enumerate(items):
        a.update([cand(i, f1, seed=f"s{s}")])
        seeds = [e.seed_origin for e in a]
        assert len(seeds) == len(set(seeds))
        for e in a:
            assert e.fitness.f1 <= best.get(e.seed_origin, float("inf"))
            best[e.seed_origin] = e.fitness.f1


def test_f2_against_archive():
    x = cand(0, 0.0, pos=0.0)
    assert fitness_f2(x, [x], dist) == float("inf")
    others = [cand(1, 0, pos=2.0), cand(2, 0, pos=0.7), cand(3, 0, pos=-5.1)]
    assert fitness_f2(x, others, dist) == pytest.approx(0.7)
    assert fitness_f2(x, [], dist) == float("inf")
