"""Pure-Python rasterization kernel.

Reference twin of the Cython module ``_raster_kernel``. The arithmetic is
written in the same order so that both produce identical bytes.
"""
import math

import numpy as np

MAX_DEPTH = 16


def _flatten(x0, y0, x1, y1, x2, y2, x3, y3, tol, depth, out):
    dx = x3 - x0
    dy = y3 - y0
    d = math.sqrt(dx * dx + dy * dy)
    if d > 1e-12:
        d1 = abs((x1 - x0) * dy - (y1 - y0) * dx) / d
        d2 = abs((x2 - x0) * dy - (y2 - y0) * dx) / d
    else:
        d1 = math.sqrt((x1 - x0) * (x1 - x0) + (y1 - y0) * (y1 - y0))
        d2 = math.sqrt((x2 - x0) * (x2 - x0) + (y2 - y0) * (y2 - y0))
    if max(d1, d2) <= tol or depth >= MAX_DEPTH:
        out.append((x0, y0, x3, y3))
        return
    x01 = (x0 + x1) * 0.5
    y01 = (y0 + y1) * 0.5
    x12 = (x1 + x2) * 0.5
    y12 = (y1 + y2) * 0.5
    x23 = (x2 + x3) * 0.5
    y23 = (y2 + y3) * 0.5
    xa = (x01 + x12) * 0.5
    ya = (y01 + y12) * 0.5
    xb = (x12 + x23) * 0.5
    yb = (y12 + y23) * 0.5
    xm = (xa + xb) * 0.5
    ym = (ya + yb) * 0.5
    _flatten(x0, y0, x01, y01, xa, ya, xm, ym, tol, depth + 1, out)
    _flatten(xm, ym, xb, yb, x23, y23, x3, y3, tol, depth + 1, out)


def flatten_segments(segments, tol):
    out = []
    for row in np.asarray(segments, dtype=np.float64):
        _flatten(*(float(v) for v in row), float(tol), 0, out)
    if not out:
        return np.zeros((0, 4), dtype=np.float64)
    return np.asarray(out, dtype=np.float64)


def fill_coverage(edges, width, height, ss):
    edges = np.asarray(edges, dtype=np.float64)
    cov = np.zeros((height, width), dtype=np.int32)
    live = edges[edges[:, 1] != edges[:, 3]]
    if len(live) == 0:
        return cov
    x0, y0, x1, y1 = live.T
    inv = 1.0 / ss
    xs = (np.arange(width * ss) + 0.5) * inv
    cols = np.arange(width * ss) // ss
    ylo = np.minimum(y0, y1)
    yhi = np.maximum(y0, y1)
    slope = x1 - x0
    dir_ = np.where(y1 > y0, 1, -1)
    for j in range(height * ss):
        ys = (j + 0.5) * inv
        hit = (ylo <= ys) & (ys < yhi)
        if not hit.any():
            continue
        xc = x0[hit] + (ys - y0[hit]) * slope[hit] / (y1[hit] - y0[hit])
        order = np.argsort(xc, kind="stable")
        xc = xc[order]
        cw = np.cumsum(dir_[hit][order])
        idx = np.searchsorted(xc, xs, side="right")
        wind = np.where(idx > 0, cw[idx - 1], 0)
        inside = wind != 0
        if inside.any():
            np.add.at(cov[j // ss], cols[inside], 1)
    return cov
