import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from metisforge.analysis.configsearch import (
    OperatorSearchResult,
    UndefinedScoreError,
    binary_search_config,
    exhaustive_search,
    killing_probability,
    likely_equivalent,
    mutation_score,
)

MAX_PROBES = math.ceil(math.log2(0.99 / 0.01)) + 2


def cont(boundary, never=False, lo=0.0, hi=0.99):
    return OperatorSearchResult("TRD", "continuous", (lo, hi), 0.01, boundary=boundary, never_killed=never)


def test_step_oracle_boundary_and_probe_count():
    res = binary_search_config("TRD", lambda p: p >= 0.30)
    assert 0.29 <= res.boundary < 0.30
    assert len(res.probes) <= math.ceil(math.log2(0.99 / 0.01)) + 1
    assert not res.never_killed and not res.all_killed


def test_never_killed_stops_after_first_probe():
    res = binary_search_config("TRD", lambda p: False)
    assert res.never_killed
    assert res.probes == [(0.99, False)]
    assert res.killed_length == 0.0


def test_everything_killed_reports_lo_with_flag():
    res = binary_search_config("TRD", lambda p: True)
    assert res.boundary == 0.0 and res.all_killed
    assert len(res.probes) <= MAX_PROBES


def test_oracle_failure_names_param():
    def boom(p):
        raise ValueError("bad")

    with pytest.raises(RuntimeError, match="0.99"):
        binary_search_config("TRD", boom)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        binary_search_config("TRD", lambda p: True, epsilon=0)
    with pytest.raises(ValueError):
        binary_search_config("TRD", lambda p: True, range=(0.5, 0.5))


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.0, max_value=0.99))
def test_binary_search_matches_grid_sweep(threshold):
    res = binary_search_config("TRD", lambda p: p >= threshold)
    assert len(res.probes) <= MAX_PROBES
    survivor = oracles.grid_sweep_boundary(lambda p: p >= threshold)
    if survivor is None:
        assert res.never_killed
        return
    # the reported survivor sits within one epsilon below the true threshold
    assert res.boundary <= threshold
    assert threshold - res.boundary <= 0.01 + 1e-12 or res.all_killed
    assert abs(res.boundary - survivor) <= 0.01 + 1e-12


@settings(max_examples=50, deadline=None)
@given(st.lists(st.booleans(), min_size=1, max_size=12))
def test_probe_bound_for_any_oracle(answers):
    it = iter(answers * 20)
    res = binary_search_config("X", lambda p: next(it))
    assert len(res.probes) <= MAX_PROBES


def test_exhaustive_search():
    assert exhaustive_search("ACH", [0, 1, 2], lambda v: False).killed_set == []
    assert exhaustive_search("WCI", [0, 1, 2, 3], lambda v: True).killed_set == [0, 1, 2, 3]
    vals = list(range(10))
    assert exhaustive_search("WCI", vals, lambda v: v % 3 == 0).killed_set == [v for v in vals if v % 3 == 0]
    with pytest.raises(ValueError):
        exhaustive_search("WCI", [], lambda v: True)


def test_likely_equivalent():
    assert likely_equivalent(lambda c: True, 0.5) is False
    assert likely_equivalent(lambda c: False, 0.5) is True


def test_mutation_score_worked_example():
    assert mutation_score(cont(0.25), cont(0.10)) == pytest.approx(0.74 / 0.89, abs=1e-12)
    assert mutation_score(cont(0.25), cont(0.10)) == pytest.approx(0.8315, abs=5e-3)


def test_mutation_score_cases():
    assert mutation_score(cont(0.4), cont(0.4)) == 1.0
    assert mutation_score(cont(None, never=True), cont(0.4)) == 0.0
    # test kills more than train: intersection is capped by the train region
    assert mutation_score(cont(0.1), cont(0.4)) == 1.0
    with pytest.raises(UndefinedScoreError, match="likely equivalent"):
        mutation_score(cont(0.2), cont(None, never=True))


def test_mutation_score_discrete():
    train = OperatorSearchResult("ACH", "discrete", killed_set=["l0", "l1", "l2"])
    test = OperatorSearchResult("ACH", "discrete", killed_set=["l1"])
    assert mutation_score(test, train) == pytest.approx(1 / 3)
    with pytest.raises(UndefinedScoreError):
        mutation_score(test, OperatorSearchResult("ACH", "discrete", killed_set=[]))


def test_mutation_score_discrete_dict_values():
    a = {"operator": "ACH", "layer": 0, "choice": "tanh"}
    b = {"operator": "ACH", "layer": 0, "choice": "sigmoid"}
    train = OperatorSearchResult("ACH", "discrete", killed_set=[a, b])
    test = OperatorSearchResult("ACH", "discrete", killed_set=[dict(b)])
    assert mutation_score(test, train) == 0.5


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 0.98), st.floats(0.0, 0.98), st.floats(0.0, 0.98))
def test_mutation_score_bounded_and_monotone(train_b, t1, t2):
    lo_t, hi_t = sorted([t1, t2])
    near = mutation_score(cont(lo_t), cont(train_b))
    far = mutation_score(cont(hi_t), cont(train_b))
    assert 0.0 <= far <= near <= 1.0


def test_mutation_score_requires_same_operator():
    with pytest.raises(ValueError):
        mutation_score(cont(0.2), OperatorSearchResult("HLR", "continuous", (0.0, 0.99), boundary=0.1))


def test_killing_probability():
    assert killing_probability([True] * 10, "discrete") == 1.0
    assert killing_probability([False] * 10, "discrete") == 0.0
    assert killing_probability([True] * 7 + [False] * 3, "discrete") == pytest.approx(0.7)
    assert killing_probability([0.8, 0.9], "continuous") == pytest.approx(0.85)
    with pytest.raises(ValueError):
        killing_probability([], "continuous")


def test_result_round_trip():
    res = binary_search_config("TRD", lambda p: p >= 0.5)
    assert OperatorSearchResult.from_dict(res.to_dict()) == res
