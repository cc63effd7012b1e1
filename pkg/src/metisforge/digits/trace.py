"""Bitmap to path-model tracing.

A deliberately small pipeline: threshold, marching squares on pixel
centres, Douglas-Peucker simplification to find corners, then a
least-squares cubic fit (Schneider's method) of the contour between
consecutive break points.
"""
import math

import numpy as np

from .path import PathModel

SIMPLIFY_TOL = 0.5
FIT_TOL = 0.35
CORNER_DEG = 60.0

# Edges of a marching-squares cell: 0 top, 1 right, 2 bottom, 3 left.
# Corner order is clockwise on screen: TL, TR, BR, BL; edge e joins corner
# e and corner (e + 1) % 4.


class TraceError(ValueError):
    pass


def _cell_segments(tl, tr, br, bl):
    """Directed (from_edge, to_edge) pairs keeping the foreground on the left."""
    c = (tl, tr, br, bl)
    ins, outs = [], []
    for e in range(4):
        a, b = c[e], c[(e + 1) % 4]
        if a and not b:
            outs.append(e)
        elif b and not a:
            ins.append(e)
    if len(ins) == 1:
        return [(ins[0], outs[0])]
    if len(ins) == 2:
        # saddle: keep diagonal foreground corners separated (4-connectivity)
        # in-edge e enters corner (e+1)%4, whose out-edge is (e+1)%4
        return [(e, (e + 1) % 4) for e in ins]
    return []


def _edge_key(r, c, e):
    # canonical id of a cell edge shared by neighbouring cells
    if e == 0:
        return ("h", r, c)
    if e == 2:
        return ("h", r + 1, c)
    if e == 3:
        return ("v", r, c)
    return ("v", r, c + 1)


def _edge_point(key):
    # padded sample (r, c) sits at canvas (c - 0.5, r - 0.5)
    kind, r, c = key
    if kind == "h":
        return (float(c), r - 0.5)
    return (c - 0.5, float(r))


def marching_squares(mask: np.ndarray) -> list:
    """Closed contours of a boolean mask as lists of canvas points.

    Outer boundaries and holes come out with opposite orientation, so the
    contours can be filled with the nonzero rule.
    """
    p = np.zeros((mask.shape[0] + 2, mask.shape[1] + 2), dtype=bool)
    p[1:-1, 1:-1] = mask
    nxt = {}
    for r in range(p.shape[0] - 1):
        for c in range(p.shape[1] - 1):
            segs = _cell_segments(p[r, c], p[r, c + 1], p[r + 1, c + 1], p[r + 1, c])
            for a, b in segs:
                nxt[_edge_key(r, c, a)] = _edge_key(r, c, b)
    loops = []
    for start in sorted(nxt):
        if start not in nxt:
            continue
        loop, k = [], start
        while k in nxt:
            loop.append(_edge_point(k))
            k = nxt.pop(k)
        loops.append(np.array(loop, dtype=np.float64))
    return loops


def _rdp(pts, tol):
    """Indices kept by Douglas-Peucker on an open polyline."""
    keep = {0, len(pts) - 1}
    stack = [(0, len(pts) - 1)]
    while stack:
        i, j = stack.pop()
        if j <= i + 1:
            continue
        a, b = pts[i], pts[j]
        d = b - a
        n = math.hypot(*d)
        seg = pts[i + 1:j] - a
        if n > 1e-12:
            dist = np.abs(seg[:, 0] * d[1] - seg[:, 1] * d[0]) / n
        else:
            dist = np.hypot(seg[:, 0], seg[:, 1])
        k = int(np.argmax(dist))
        if dist[k] > tol:
            keep.add(i + 1 + k)
            stack.append((i, i + 1 + k))
            stack.append((i + 1 + k, j))
    return sorted(keep)


def simplify_closed(loop: np.ndarray, tol: float = SIMPLIFY_TOL) -> list:
    n = len(loop)
    if n <= 8:
        return list(range(n))
    far = int(np.argmax(np.hypot(*(loop - loop[0]).T)))
    first = _rdp(loop[: far + 1], tol)
    second = _rdp(np.vstack([loop[far:], loop[:1]]), tol)
    idx = first + [far + i for i in second[1:-1]]
    return sorted(set(idx))


def _unit(v):
    n = math.hypot(v[0], v[1])
    return v / n if n > 1e-12 else np.zeros(2)


def _bez(ctrl, t):
    t = np.asarray(t)[:, None]
    mt = 1 - t
    return mt ** 3 * ctrl[0] + 3 * mt ** 2 * t * ctrl[1] + 3 * mt * t ** 2 * ctrl[2] + t ** 3 * ctrl[3]


def _bez_d1(ctrl, t):
    t = np.asarray(t)[:, None]
    mt = 1 - t
    return 3 * mt ** 2 * (ctrl[1] - ctrl[0]) + 6 * mt * t * (ctrl[2] - ctrl[1]) + 3 * t ** 2 * (ctrl[3] - ctrl[2])


def _bez_d2(ctrl, t):
    t = np.asarray(t)[:, None]
    return 6 * (1 - t) * (ctrl[2] - 2 * ctrl[1] + ctrl[0]) + 6 * t * (ctrl[3] - 2 * ctrl[2] + ctrl[1])


def _line_cubic(a, b):
    return np.array([a, a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0, b])


def _least_squares(pts, u, t1, t2):
    """Solve for tangent magnitudes minimising squared error (Schneider)."""
    p0, p3 = pts[0], pts[-1]
    b = u[:, None]
    mt = 1 - b
    a1 = 3 * mt ** 2 * b * t1
    a2 = 3 * mt * b ** 2 * t2
    c = np.array([[np.sum(a1 * a1), np.sum(a1 * a2)], [np.sum(a1 * a2), np.sum(a2 * a2)]])
    tmp = pts - (mt ** 3 + 3 * mt ** 2 * b) * p0 - (3 * mt * b ** 2 + b ** 3) * p3
    x = np.array([np.sum(a1 * tmp), np.sum(a2 * tmp)])
    det = c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0]
    seg_len = math.hypot(*(p3 - p0))
    if abs(det) > 1e-12:
        al1 = (x[0] * c[1, 1] - x[1] * c[0, 1]) / det
        al2 = (c[0, 0] * x[1] - c[1, 0] * x[0]) / det
    else:
        al1 = al2 = seg_len / 3.0
    if al1 < 1e-6 * seg_len or al2 < 1e-6 * seg_len:
        al1 = al2 = seg_len / 3.0
    return np.array([p0, p0 + al1 * t1, p3 + al2 * t2, p3])


def _fit(pts, t1, t2, tol, depth=0):
    if len(pts) <= 2 or depth > 8:
        return [_line_cubic(pts[0], pts[-1])]
    d = np.hypot(*np.diff(pts, axis=0).T)
    total = d.sum()
    if total <= 1e-12:
        return [_line_cubic(pts[0], pts[-1])]
    u = np.concatenate([[0.0], np.cumsum(d) / total])
    ctrl = _least_squares(pts, u, t1, t2)
    for _ in range(4):
        err = np.hypot(*(_bez(ctrl, u) - pts).T)
        if err.max() <= tol:
            return [ctrl]
        # one Newton step on the parameters
        diff = _bez(ctrl, u) - pts
        d1, d2 = _bez_d1(ctrl, u), _bez_d2(ctrl, u)
        num = np.sum(diff * d1, axis=1)
        den = np.sum(d1 * d1, axis=1) + np.sum(diff * d2, axis=1)
        step = np.where(np.abs(den) > 1e-12, num / np.where(den == 0, 1, den), 0.0)
        u = np.clip(u - step, 0.0, 1.0)
        u[0], u[-1] = 0.0, 1.0
        ctrl = _least_squares(pts, u, t1, t2)
    err = np.hypot(*(_bez(ctrl, u) - pts).T)
    if err.max() <= tol:
        return [ctrl]
    split = int(np.clip(np.argmax(err), 1, len(pts) - 2))
    tc = _unit(pts[split + 1] - pts[split - 1])
    return _fit(pts[: split + 1], t1, -tc, tol, depth + 1) + _fit(pts[split:], tc, t2, tol, depth + 1)


def fit_loop(loop: np.ndarray) -> list:
    """Fit one closed contour with cubic segments; returns ``(p0, p1, p2, p3)`` rows."""
    n = len(loop)
    keep = simplify_closed(loop)
    verts = loop[keep]
    m = len(verts)
    turns = []
    for i in range(m):
        a = _unit(verts[i] - verts[i - 1])
        b = _unit(verts[(i + 1) % m] - verts[i])
        turns.append(math.degrees(math.acos(float(np.clip(a @ b, -1.0, 1.0)))))
    corners = [i for i in range(m) if turns[i] >= CORNER_DEG]
    breaks = sorted(set(corners))
    if len(breaks) < 2:
        # smooth loop: split at the two simplification anchors
        far = int(np.argmax([math.hypot(*(v - verts[0])) for v in verts]))
        breaks = sorted(set(breaks) | {0, far})
        if len(breaks) < 2:
            breaks = [0, m // 2] if m > 1 else [0]
    tangents_out, tangents_in = {}, {}
    for i in breaks:
        prev_v, here, next_v = verts[i - 1], verts[i], verts[(i + 1) % m]
        if i in corners:
            tangents_out[i] = _unit(next_v - here)
            tangents_in[i] = _unit(prev_v - here)
        else:
            t = _unit(next_v - prev_v)
            tangents_out[i], tangents_in[i] = t, -t
    segs = []
    for bi, i in enumerate(breaks):
        j = breaks[(bi + 1) % len(breaks)]
        a, b = keep[i], keep[j]
        span = loop[a:b + 1] if b > a else np.vstack([loop[a:], loop[:b + 1]])
        if len(breaks) == 1:
            span = np.vstack([loop[a:], loop[: a + 1]])
        for ctrl in _fit(span, tangents_out[i], tangents_in[j], FIT_TOL):
            segs.append(ctrl)
    # re-chain exactly so that closure holds bit for bit
    for k in range(len(segs)):
        segs[k][3] = segs[(k + 1) % len(segs)][0]
    return segs


def trace_bitmap(grid, threshold: float = 128) -> PathModel:
    """Vectorize a grayscale grid into a closed-path model."""
    if not 0 < threshold < 255:
        raise ValueError("threshold must lie in (0, 255)")
    mask = np.asarray(grid) >= threshold
    if not mask.any():
        raise TraceError("nothing to trace: no pixel reaches the threshold")
    subpaths = [fit_loop(loop) for loop in marching_squares(mask)]
    return PathModel.from_segments(subpaths)
