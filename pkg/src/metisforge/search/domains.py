"""Domain adapters: how the search creates, mutates, renders and compares inputs."""
from __future__ import annotations

import numpy as np

from ..digits.path import DigitInput, mutate_digit
from ..digits.raster import rasterize
from ..eyes import EyeChromosome, mutate_chromosome, render_features, sample_chromosome
from ..fitness import RegressionTolerance, eval_classifier, eval_regressor, gene_distance, pixel_distance
from ..harness.data import Split
from .archive import PER_SEED, THRESHOLD


class DigitDomain:
    """Digits as cubic-Bezier path models, rendered to 28x28 grids."""

    policy = PER_SEED
    task = "classification"

    def __init__(self, seeds, extent=(1.0, 3.0)):
        self.seeds = list(seeds)
        self.extent = tuple(extent)

    def seed_items(self, rng, count):
        return [(s.id, s.model, s.label) for s in self.seeds]

    def mutate(self, genotype, rng):
        return mutate_digit(genotype, self.extent, rng)

    def expected(self, genotype, seed_expected):
        return seed_expected

    def express(self, genotype, expected):
        grid = rasterize(genotype)
        return DigitInput(grid, int(expected)), grid.reshape(-1) / 255.0

    def distance(self, a, b) -> float:
        return pixel_distance(a.phenotype, b.phenotype)

    def outcome(self, output_row, expected):
        return eval_classifier(output_row, int(expected))

    def test_rows(self, entries) -> Split:
        if not entries:
            return Split(np.zeros((0, 784)), np.zeros(0, dtype=np.int64))
        return Split(np.array([e.model_input for e in entries]), np.array([int(e.expected) for e in entries]))


class EyeDomain:
    """Synthetic eye chromosomes; genotype is ``(chromosome, noise_seed)``."""

    policy = THRESHOLD
    task = "regression"

    def __init__(self, pool_factor: int = 4, tolerance: RegressionTolerance = RegressionTolerance()):
        self.pool_factor = pool_factor
        self.tolerance = tolerance

    def seed_items(self, rng, count):
        out = []
        for k in range(self.pool_factor * count):
            c = sample_chromosome(rng)
            out.append((f"s{k}", (c, int(rng.integers(2**31))), None))
        return out

    def mutate(self, genotype, rng):
        c, _ = genotype
        # a new render draws fresh values for the uncontrollable parameters
        return mutate_chromosome(c, rng), int(rng.integers(2**31))

    def expected(self, genotype, seed_expected):
        c = genotype[0]
        return (c.eye_pitch, c.eye_yaw)

    def express(self, genotype, expected):
        c, noise_seed = genotype
        fv = render_features(c, noise_seed)
        return fv, fv.model_input()

    def distance(self, a, b) -> float:
        return gene_distance(a.genotype[0], b.genotype[0])

    def outcome(self, output_row, expected):
        return eval_regressor(output_row, expected, self.tolerance)

    def test_rows(self, entries) -> Split:
        if not entries:
            return Split(np.zeros((0, 34)), np.zeros((0, 2)))
        return Split(np.array([e.model_input for e in entries]), np.array([list(e.expected) for e in entries]))


def chromosome_of(genotype) -> EyeChromosome:
    return genotype[0]
