"""Statistical killing criterion: rank tests and Cohen's d."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ALPHA = 0.05
MIN_EFFECT = 0.5


def _rank(values: np.ndarray) -> tuple:
    """Average ranks (1-based) and the tie-group sizes."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    ties = []
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        if j > i:
            ties.append(j - i + 1)
        i = j + 1
    return ranks, ties


def _two_sided(z: float) -> float:
    return min(1.0, math.erfc(z / math.sqrt(2.0)))


def rank_sum_p(a, b) -> float:
    """Two-sided Mann-Whitney U p-value (normal approximation, tie and
    continuity corrected). All values tied gives 1.0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 3 or len(b) < 3:
        raise ValueError("rank-sum test needs at least 3 values per sample")
    n1, n2 = len(a), len(b)
    n = n1 + n2
    ranks, ties = _rank(np.concatenate([a, b]))
    u1 = ranks[:n1].sum() - n1 * (n1 + 1) / 2.0
    mu = n1 * n2 / 2.0
    tie_term = sum(t ** 3 - t for t in ties) / (n * (n - 1))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return 1.0
    z = (abs(u1 - mu) - 0.5) / math.sqrt(var)
    return _two_sided(max(z, 0.0))


def signed_rank_p(a, b) -> float:
    """Two-sided Wilcoxon signed-rank p-value for paired samples.

    Zero differences are dropped; normal approximation with tie and
    continuity correction.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) != len(b):
        raise ValueError("paired test needs equal-length samples")
    if len(a) < 3:
        raise ValueError("signed-rank test needs at least 3 pairs")
    d = a - b
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return 1.0
    ranks, ties = _rank(np.abs(d))
    t_plus = ranks[d > 0].sum()
    mu = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - sum(t ** 3 - t for t in ties) / 48.0
    if var <= 0:
        return 1.0
    z = (abs(t_plus - mu) - 0.5) / math.sqrt(var)
    return _two_sided(max(z, 0.0))


def cohens_d(a, b) -> float:
    """|mean difference| over the df-weighted pooled standard deviation.

    Returns 0 when both samples are constant and equal, ``inf`` when the
    pooled deviation is zero but the means differ.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("Cohen's d needs at least 2 values per sample")
    n1, n2 = len(a), len(b)
    pooled = ((n1 - 1) * a.var(ddof=1) + (n2 - 1) * b.var(ddof=1)) / (n1 + n2 - 2)
    diff = abs(a.mean() - b.mean())
    if pooled <= 0:
        return 0.0 if diff == 0 else math.inf
    return float(diff / math.sqrt(pooled))


@dataclass(frozen=True)
class KillOutcome:
    p_value: float
    effect_size: float
    killed: bool
    samples: tuple

    def to_dict(self) -> dict:
        return {
            "p_value": self.p_value,
            "effect_size": self.effect_size if math.isfinite(self.effect_size) else "inf",
            "killed": self.killed,
            "original": list(self.samples[0]),
            "mutant": list(self.samples[1]),
        }


def is_killed(orig_metrics, mut_metrics, paired: bool = False) -> KillOutcome:
    """Killed iff p < 0.05 and Cohen's d >= 0.5 (two-sided)."""
    orig = [float(v) for v in orig_metrics]
    mut = [float(v) for v in mut_metrics]
    if len(orig) != len(mut):
        raise ValueError("original and mutant metric lists must have equal size")
    p = signed_rank_p(orig, mut) if paired else rank_sum_p(orig, mut)
    d = cohens_d(orig, mut)
    return KillOutcome(p, d, bool(p < ALPHA and d >= MIN_EFFECT), (tuple(orig), tuple(mut)))
