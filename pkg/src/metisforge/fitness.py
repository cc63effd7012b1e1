"""Objective functions and domain distances used by the search."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eyes import CATEGORICAL, EyeChromosome, angular_error

DEFAULT_TOLERANCE = math.radians(5.0)


@dataclass(frozen=True)
class EvalOutcome:
    correct: bool
    closeness: float


@dataclass(frozen=True)
class RegressionTolerance:
    max_error: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if not self.max_error > 0:
            raise ValueError("max_error must be positive")


def eval_classifier(prediction, expected_label: int) -> EvalOutcome:
    """Margin of the expected class over the best other class, or -1.

    A tie with another class counts as correct with margin 0.
    """
    p = np.asarray(prediction, dtype=np.float64)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("prediction must be a vector of at least two probabilities")
    if not 0 <= expected_label < p.size:
        raise ValueError(f"label {expected_label} out of range for {p.size} classes")
    if abs(p.sum() - 1.0) > 1e-6:
        raise ValueError("probabilities must sum to 1")
    expected = p[expected_label]
    other = np.max(np.delete(p, expected_label))
    if expected >= other:
        return EvalOutcome(True, float(expected - other))
    return EvalOutcome(False, -1.0)


def eval_regressor(predicted, truth, tol: RegressionTolerance = RegressionTolerance()) -> EvalOutcome:
    err = angular_error(predicted, truth)
    closeness = tol.max_error - err
    if abs(closeness) <= 1e-12:
        # an error equal to the tolerance up to rounding sits on the boundary
        closeness = 0.0
    return EvalOutcome(closeness >= 0.0, closeness)


def fitness_f1(outcomes) -> float:
    """Sum of misbehaviour closeness over the mutant instances."""
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("need at least one mutant instance")
    return float(sum(o.closeness for o in outcomes))


def fitness_f2(x, archive_entries, dist) -> float:
    """Sparseness: distance to the nearest archived solution other than ``x``."""
    best = math.inf
    for y in archive_entries:
        if y is x or getattr(y, "id", None) == getattr(x, "id", object()):
            continue
        best = min(best, dist(x, y))
    return best


def pixel_distance(a, b) -> float:
    ga = np.asarray(getattr(a, "grid", a), dtype=np.float64)
    gb = np.asarray(getattr(b, "grid", b), dtype=np.float64)
    if ga.shape != gb.shape:
        raise ValueError(f"grid shapes differ: {ga.shape} vs {gb.shape}")
    return float(np.linalg.norm((ga - gb).ravel()))


def gene_distance(a: EyeChromosome, b: EyeChromosome) -> float:
    """Mean of per-gene distances, in [0, 1].

    Float genes use |d| / (|d| + 1), each (pitch, yaw) pair the angle between
    gaze vectors (at most 1 rad), categorical genes 0 or 1.
    """
    if not isinstance(a, EyeChromosome) or not isinstance(b, EyeChromosome):
        raise TypeError("gene_distance needs two EyeChromosome values")
    parts = [
        min(angular_error((a.head_pitch, a.head_yaw), (b.head_pitch, b.head_yaw)), 1.0),
        min(angular_error((a.eye_pitch, a.eye_yaw), (b.eye_pitch, b.eye_yaw)), 1.0),
    ]
    for g in ("pupil_size", "iris_size", "ambient_intensity", "exposure", "light_rotation"):
        d = abs(getattr(a, g) - getattr(b, g))
        parts.append(d / (d + 1.0))
    for g in CATEGORICAL:
        parts.append(0.0 if getattr(a, g) == getattr(b, g) else 1.0)
    return float(np.mean(parts))


def is_solution_candidate(orig_outcomes, mut_outcomes) -> bool:
    """Correct on at least one original and wrong on at least one mutant."""
    return any(o.correct for o in orig_outcomes) and any(not o.correct for o in mut_outcomes)
