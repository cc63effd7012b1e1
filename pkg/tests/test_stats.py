import math

import numpy as np
import pytest

import oracles
from metisforge.analysis.stats import cohens_d, is_killed, rank_sum_p, signed_rank_p


def test_rank_sum_identical_lists_is_one():
    assert rank_sum_p([1, 2, 3, 4], [1, 2, 3, 4]) == 1.0


def test_rank_sum_all_tied_is_one():
    assert rank_sum_p([0.5] * 6, [0.5] * 6) == 1.0


def test_rank_sum_separated_samples():
    p = rank_sum_p(range(1, 11), range(11, 21))
    assert p == pytest.approx(oracles.P_ONE_TO_TEN_VS_ELEVEN_TO_TWENTY, abs=1e-4)
    assert p == pytest.approx(1.8267e-4, rel=1e-3)


def test_rank_sum_symmetric(rng):
    for _ in range(20):
        a, b = rng.normal(size=8), rng.normal(0.7, size=8)
        assert rank_sum_p(a, b) == rank_sum_p(b, a)


def test_rank_sum_matches_oracle_with_ties(rng):
    for _ in range(100):
        a = rng.normal(size=20).round(1)
        b = rng.normal(rng.uniform(-1, 1), size=20).round(1)
        assert rank_sum_p(a, b) == pytest.approx(oracles.mann_whitney_p(a, b), abs=1e-12)


def test_rank_sum_needs_three_values():
    with pytest.raises(ValueError):
        rank_sum_p([1, 2], [3, 4, 5])


def test_signed_rank_against_scipy(rng):
    stats = pytest.importorskip("scipy.stats")
    for _ in range(50):
        a = rng.normal(size=15).round(2)
        b = (a + rng.normal(0.3, 0.5, size=15)).round(2)
        ref = stats.wilcoxon(a, b, zero_method="wilcox", correction=True, method="approx").pvalue
        assert signed_rank_p(a, b) == pytest.approx(ref, abs=1e-9)


def test_signed_rank_all_zero_differences():
    assert signed_rank_p([1, 2, 3], [1, 2, 3]) == 1.0


def test_cohens_d_examples():
    assert cohens_d([1, 2, 3], [1, 2, 3]) == 0.0
    assert cohens_d([0.9, 0.91, 0.92], [0.8, 0.81, 0.82]) == pytest.approx(oracles.D_SMALL_EXAMPLE, rel=1e-9)
    # means one pooled standard deviation apart
    assert cohens_d([0, 2], [1, 3]) == pytest.approx(1 / math.sqrt(2))
    assert cohens_d([0.0, 1.0, 2.0], [1.0, 2.0, 3.0]) == pytest.approx(1.0)


def test_cohens_d_degenerate():
    assert cohens_d([0.7] * 5, [0.7] * 5) == 0.0
    assert cohens_d([0.7] * 5, [0.6] * 5) == math.inf


def test_cohens_d_matches_oracle(rng):
    for _ in range(100):
        a, b = rng.normal(size=20), rng.normal(0.4, 1.3, size=20)
        assert cohens_d(a, b) == pytest.approx(oracles.cohens_d(list(a), list(b)), rel=1e-9, abs=1e-9)


def test_is_killed_identical_not_killed():
    out = is_killed([0.9] * 6, [0.9] * 6)
    assert (out.p_value, out.effect_size, out.killed) == (1.0, 0.0, False)


def test_is_killed_clear_difference(rng):
    orig = 0.95 + rng.normal(0, 1e-6, 20)
    mut = 0.30 + rng.normal(0, 1e-6, 20)
    out = is_killed(orig, mut)
    assert out.killed and out.p_value < 0.05 and out.effect_size >= 0.5


def test_is_killed_needs_both_conditions(monkeypatch):
    import metisforge.analysis.stats as st

    monkeypatch.setattr(st, "rank_sum_p", lambda a, b: 0.01)
    monkeypatch.setattr(st, "cohens_d", lambda a, b: 0.3)
    out = st.is_killed([1, 2, 3], [4, 5, 6])
    assert out.p_value == 0.01 and not out.killed


def test_is_killed_symmetric(rng):
    for _ in range(50):
        a, b = rng.normal(size=6), rng.normal(rng.uniform(0, 2), size=6)
        assert is_killed(a, b).killed == is_killed(b, a).killed


def test_is_killed_paired_flag():
    out = is_killed([0.9, 0.91, 0.92, 0.93, 0.94, 0.95], [0.5, 0.52, 0.51, 0.53, 0.5, 0.49], paired=True)
    assert out.p_value == pytest.approx(signed_rank_p([0.9, 0.91, 0.92, 0.93, 0.94, 0.95],
                                                     [0.5, 0.52, 0.51, 0.53, 0.5, 0.49]))


def test_kill_outcome_dict_is_json_safe():
    import json

    json.dumps(is_killed([0.7] * 5, [0.6] * 5).to_dict(), allow_nan=False)


def test_unequal_sizes_rejected():
    with pytest.raises(ValueError):
        is_killed([1, 2, 3], [1, 2, 3, 4])
    assert np.isfinite(rank_sum_p([1, 2, 3], [1, 2, 3, 4]))
