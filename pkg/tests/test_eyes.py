from dataclasses import replace

import numpy as np
import pytest

from metisforge.eyes import (
    CATEGORICAL,
    CONTINUOUS,
    GENES,
    EyeChromosome,
    lipschitz_bounds,
    load_schema,
    mutate_chromosome,
    render_features,
    sample_chromosome,
    validate,
)

SCHEMA = load_schema()


def test_render_is_deterministic(rng):
    c = sample_chromosome(rng)
    a, b = render_features(c, 7), render_features(c, 7)
    assert np.array_equal(a.values, b.values)
    assert a.values.shape == (32,)
    assert a.truth == (c.eye_pitch, c.eye_yaw) and a.head == (c.head_pitch, c.head_yaw)
    assert a.model_input().shape == (34,)


def test_noise_seed_changes_within_amplitude(rng):
    c = sample_chromosome(rng)
    a, b = render_features(c, 1), render_features(c, 2)
    gap = np.max(np.abs(a.values - b.values))
    assert 0 < gap <= 2 * SCHEMA.noise_amplitude == 0.02


def test_categorical_change_shifts_by_embedding(rng):
    c = sample_chromosome(rng)
    d = replace(c, skin_texture=(c.skin_texture + 2) % 5)
    delta = SCHEMA.embed["skin_texture"][d.skin_texture] - SCHEMA.embed["skin_texture"][c.skin_texture]
    got = render_features(d, 5).values - render_features(c, 5).values
    assert np.allclose(got, delta, atol=1e-12)


def test_render_rejects_invalid(rng):
    c = replace(sample_chromosome(rng), pupil_size=5.0)
    with pytest.raises(ValueError, match="pupil_size"):
        render_features(c, 0)


def test_lipschitz_bound_holds(rng):
    bounds = lipschitz_bounds()
    for _ in range(30):
        c = sample_chromosome(rng)
        base = render_features(c, 0).values
        for g in CONTINUOUS:
            lo, hi = SCHEMA.bounds[g]
            delta = 0.05 * (hi - lo)
            v = getattr(c, g)
            v2 = v + delta if v + delta <= hi else v - delta
            moved = render_features(replace(c, **{g: v2}), 0).values
            assert np.linalg.norm(moved - base) <= bounds[g] * abs(v2 - v) + 1e-12


def test_mutation_changes_exactly_one_gene(rng):
    for _ in range(200):
        c = sample_chromosome(rng)
        d = mutate_chromosome(c, rng)
        validate(d)
        assert sum(getattr(c, g) != getattr(d, g) for g in GENES) == 1


def test_mutation_clamps_at_bound():
    lo, hi = SCHEMA.bounds["exposure"]
    c = replace(sample_chromosome(np.random.default_rng(0)), exposure=hi)

    class PlusOnExposure:
        def integers(self, *a):
            return GENES.index("exposure") if a == (len(GENES),) else 1

    assert mutate_chromosome(c, PlusOnExposure()).exposure == hi


def test_mutation_gene_frequencies():
    rng = np.random.default_rng(4)
    c = replace(sample_chromosome(rng), **{g: sum(SCHEMA.bounds[g]) / 2 for g in CONTINUOUS})
    counts = dict.fromkeys(GENES, 0)
    for _ in range(10000):
        d = mutate_chromosome(c, rng)
        (g,) = [g for g in GENES if getattr(c, g) != getattr(d, g)]
        counts[g] += 1
    for g in GENES:
        assert abs(counts[g] / 10000 - 1 / len(GENES)) <= 0.02


def test_categorical_mutation_picks_another_value(rng):
    c = sample_chromosome(rng)
    for _ in range(200):
        d = mutate_chromosome(c, rng)
        for g in CATEGORICAL:
            assert 0 <= getattr(d, g) < 5


def test_sampling_is_valid_and_centered():
    rng = np.random.default_rng(5)
    draws = [sample_chromosome(rng) for _ in range(10000)]
    for c in draws[:100]:
        validate(c)
    lo, hi = SCHEMA.bounds["head_pitch"]
    mean = np.mean([c.head_pitch for c in draws])
    assert abs(mean - (lo + hi) / 2) <= 0.02 * (hi - lo)


def test_distinct_seeds_give_distinct_draws():
    draws = {sample_chromosome(np.random.default_rng(s)) for s in range(100)}
    assert len(draws) == 100


def test_record_round_trip(rng):
    c = sample_chromosome(rng)
    assert EyeChromosome.from_record(c.to_record()) == c
    with pytest.raises(ValueError, match="unknown genes"):
        EyeChromosome.from_record({**c.to_record(), "tail": 1})
