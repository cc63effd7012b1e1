"""Reference implementations written independently of the package code.

They favour the most literal reading of each definition over speed.
"""
import itertools
import math
import statistics

import numpy as np


def dominates(a, b):
    """(f1 minimised, f2 maximised)."""
    return a[0] <= b[0] and a[1] >= b[1] and (a[0] < b[0] or a[1] > b[1])


def brute_force_fronts(points):
    """Peel non-dominated sets one at a time; returns lists of indices."""
    remaining = set(range(len(points)))
    fronts = []
    while remaining:
        front = sorted(i for i in remaining
                       if not any(dominates(points[j], points[i]) for j in remaining if j != i))
        fronts.append(front)
        remaining -= set(front)
    return fronts


def cohens_d(a, b):
    na, nb = len(a), len(b)
    va, vb = statistics.variance(a), statistics.variance(b)
    pooled = math.sqrt(((na - 1) * va + (nb - 1) * vb) / (na + nb - 2))
    diff = abs(statistics.fmean(a) - statistics.fmean(b))
    if pooled == 0:
        return 0.0 if diff == 0 else math.inf
    return diff / pooled


def mann_whitney_p(a, b):
    """Normal approximation with tie and continuity correction, via U counted pairwise."""
    n1, n2 = len(a), len(b)
    u = sum(1.0 if x > y else 0.5 if x == y else 0.0 for x, y in itertools.product(a, b))
    allv = list(a) + list(b)
    counts = {}
    for v in allv:
        counts[v] = counts.get(v, 0) + 1
    n = n1 + n2
    tie = sum(t ** 3 - t for t in counts.values())
    var = n1 * n2 / 12.0 * ((n + 1) - tie / (n * (n - 1)))
    if var == 0:
        return 1.0
    z = max(abs(u - n1 * n2 / 2.0) - 0.5, 0.0) / math.sqrt(var)
    return min(1.0, 2.0 * (1.0 - 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))))


def grid_sweep_boundary(killed, lo=0.0, hi=0.99, eps=0.01):
    """Greatest non-killed value on an eps-grid below the killed region,
    scanning from the aggressive end; None if the top is not killed, lo if
    nothing on the grid survives."""
    grid = np.arange(lo, hi + 1e-12, eps)
    if not killed(grid[-1]):
        return None
    for v in grid[::-1]:
        if not killed(v):
            return float(v)
    return float(lo)


def pixel_l2(a, b):
    d = np.asarray(a, dtype=float).ravel() - np.asarray(b, dtype=float).ravel()
    return math.sqrt(float(sum(x * x for x in d)))


def gaze_angle(p, q):
    """Angle between gaze vectors built independently from (pitch, yaw)."""
    def vec(pitch, yaw):
        return np.array([-math.cos(pitch) * math.sin(yaw), -math.sin(pitch), -math.cos(pitch) * math.cos(yaw)])
    u, v = vec(*p), vec(*q)
    c = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return math.acos(max(-1.0, min(1.0, c)))


# Frozen values computed with the oracles above before the build.
P_ONE_TO_TEN_VS_ELEVEN_TO_TWENTY = 1.8267e-4
D_SMALL_EXAMPLE = 10.0
