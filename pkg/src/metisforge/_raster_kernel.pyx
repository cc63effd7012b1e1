# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled rasterization kernel.

Must stay bit-for-bit identical to ``metisforge._raster_py``; the test suite
compares both on random paths.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

DEF MAX_DEPTH = 16


cdef inline double _fmax(double a, double b) nogil:
    return a if a >= b else b


cdef void _flatten(double x0, double y0, double x1, double y1,
                   double x2, double y2, double x3, double y3,
                   double tol, int depth, list out):
    cdef double dx = x3 - x0
    cdef double dy = y3 - y0
    cdef double d = sqrt(dx * dx + dy * dy)
    cdef double d1, d2
    if d > 1e-12:
        d1 = fabs((x1 - x0) * dy - (y1 - y0) * dx) / d
        d2 = fabs((x2 - x0) * dy - (y2 - y0) * dx) / d
    else:
        d1 = sqrt((x1 - x0) * (x1 - x0) + (y1 - y0) * (y1 - y0))
        d2 = sqrt((x2 - x0) * (x2 - x0) + (y2 - y0) * (y2 - y0))
    if _fmax(d1, d2) <= tol or depth >= MAX_DEPTH:
        out.append((x0, y0, x3, y3))
        return
    cdef double x01 = (x0 + x1) * 0.5
    cdef double y01 = (y0 + y1) * 0.5
    cdef double x12 = (x1 + x2) * 0.5
    cdef double y12 = (y1 + y2) * 0.5
    cdef double x23 = (x2 + x3) * 0.5
    cdef double y23 = (y2 + y3) * 0.5
    cdef double xa = (x01 + x12) * 0.5
    cdef double ya = (y01 + y12) * 0.5
    cdef double xb = (x12 + x23) * 0.5
    cdef double yb = (y12 + y23) * 0.5
    cdef double xm = (xa + xb) * 0.5
    cdef double ym = (ya + yb) * 0.5
    _flatten(x0, y0, x01, y01, xa, ya, xm, ym, tol, depth + 1, out)
    _flatten(xm, ym, xb, yb, x23, y23, x3, y3, tol, depth + 1, out)


def flatten_segments(double[:, ::1] segments, double tol):
    """Flatten cubic segments ``(K, 8)`` into line edges ``(E, 4)``."""
    cdef list out = []
    cdef Py_ssize_t k
    for k in range(segments.shape[0]):
        _flatten(segments[k, 0], segments[k, 1], segments[k, 2], segments[k, 3],
                 segments[k, 4], segments[k, 5], segments[k, 6], segments[k, 7],
                 tol, 0, out)
    if not out:
        return np.zeros((0, 4), dtype=np.float64)
    return np.asarray(out, dtype=np.float64)


def fill_coverage(double[:, ::1] edges, int width, int height, int ss):
    """Count covered supersamples per pixel under the nonzero winding rule."""
    cdef Py_ssize_t n_edges = edges.shape[0]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] cov = np.zeros((height, width), dtype=np.int32)
    cdef double[::1] xc = np.empty(max(n_edges, 1), dtype=np.float64)
    cdef int[::1] wc = np.empty(max(n_edges, 1), dtype=np.int32)
    cdef Py_ssize_t j, i, e, n, k, m
    cdef double ys, xs, x0, y0, x1, y1, tx
    cdef int tw, wsum
    cdef double inv = 1.0 / ss
    for j in range(height * ss):
        ys = (j + 0.5) * inv
        n = 0
        for e in range(n_edges):
            x0 = edges[e, 0]
            y0 = edges[e, 1]
            x1 = edges[e, 2]
            y1 = edges[e, 3]
            if y0 == y1:
                continue
            if (y0 <= ys and ys < y1) or (y1 <= ys and ys < y0):
                xc[n] = x0 + (ys - y0) * (x1 - x0) / (y1 - y0)
                wc[n] = 1 if y1 > y0 else -1
                n += 1
        if n == 0:
            continue
        # insertion sort; crossing counts per row are small
        for k in range(1, n):
            tx = xc[k]
            tw = wc[k]
            m = k - 1
            while m >= 0 and xc[m] > tx:
                xc[m + 1] = xc[m]
                wc[m + 1] = wc[m]
                m -= 1
            xc[m + 1] = tx
            wc[m + 1] = tw
        k = 0
        wsum = 0
        for i in range(width * ss):
            xs = (i + 0.5) * inv
            while k < n and xc[k] <= xs:
                wsum += wc[k]
                k += 1
            if wsum != 0:
                cov[j // ss, i // ss] += 1
    return cov
