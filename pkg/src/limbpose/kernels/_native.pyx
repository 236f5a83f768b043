# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-pixel kernels: map rasterisation, NMS scan, line integrals.

Mirrors ``limbpose.kernels._numpy`` function for function; the two backends
must stay numerically interchangeable (identical binary masks, real maps
within 1e-12).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()


def disk_mask(int h, int w, double cx, double cy, double radius):
    """Binary (h, w) mask of pixels within ``radius`` of (cx, cy), inclusive."""
    out = np.zeros((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] o = out
    cdef double r2 = radius * radius
    cdef double dx, dy, d2
    cdef int i, j
    for i in range(h):
        dy = i - cy
        for j in range(w):
            dx = j - cx
            d2 = dx * dx + dy * dy
            if d2 <= r2:
                o[i, j] = 1
    return out


def gaussian_disk(int h, int w, double cx, double cy, double radius, double sigma):
    """Gaussian bump exp(-d^2 / (2 sigma^2)) truncated to the radius disk."""
    out = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double r2 = radius * radius
    cdef double inv = 2.0 * sigma * sigma
    cdef double dx, dy, d2
    cdef int i, j
    for i in range(h):
        dy = i - cy
        for j in range(w):
            dx = j - cx
            d2 = dx * dx + dy * dy
            if d2 <= r2:
                o[i, j] = exp(-d2 / inv)
    return out


def segment_mask(int h, int w, double ax, double ay, double bx, double by,
                 double thickness):
    """Binary mask of the thickness rectangle centred on segment ab."""
    out = np.zeros((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] o = out
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double l2 = dx * dx + dy * dy
    if l2 == 0.0:
        return out
    cdef double half = thickness / 2.0
    cdef double lim = half * half * l2
    cdef double px, py, dot, cross
    cdef int i, j
    for i in range(h):
        py = i - ay
        for j in range(w):
            px = j - ax
            dot = px * dx + py * dy
            if dot >= 0.0 and dot <= l2:
                cross = px * dy - py * dx
                if cross * cross <= lim:
                    o[i, j] = 1
    return out


def gaussian_segment(int h, int w, double ax, double ay, double bx, double by,
                     double thickness, double sigma):
    """1-D Gaussian along segment ab inside its thickness rectangle."""
    out = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double l2 = dx * dx + dy * dy
    if l2 == 0.0:
        return out
    cdef double half = thickness / 2.0
    cdef double lim = half * half * l2
    cdef double length = sqrt(l2)
    cdef double inv = 2.0 * sigma * sigma
    cdef double px, py, dot, cross, u
    cdef int i, j
    for i in range(h):
        py = i - ay
        for j in range(w):
            px = j - ax
            dot = px * dx + py * dy
            if dot >= 0.0 and dot <= l2:
                cross = px * dy - py * dx
                if cross * cross <= lim:
                    u = (dot - 0.5 * l2) / length
                    o[i, j] = exp(-(u * u) / inv)
    return out


def local_maxima_mask(values, int window, double threshold):
    """Mask of strict local maxima; ties go to the lowest row-major index."""
    cdef cnp.ndarray[double, ndim=2, mode="c"] v = np.ascontiguousarray(
        values, dtype=np.float64)
    cdef int h = v.shape[0]
    cdef int w = v.shape[1]
    out = np.zeros((h, w), dtype=np.uint8)
    cdef unsigned char[:, ::1] o = out
    cdef int half = window // 2
    cdef int i, j, qi, qj, i0, i1, j0, j1
    cdef double val
    cdef bint keep
    for i in range(h):
        for j in range(w):
            val = v[i, j]
            if val < threshold:
                continue
            i0 = i - half
            if i0 < 0:
                i0 = 0
            i1 = i + half + 1
            if i1 > h:
                i1 = h
            j0 = j - half
            if j0 < 0:
                j0 = 0
            j1 = j + half + 1
            if j1 > w:
                j1 = w
            keep = True
            for qi in range(i0, i1):
                for qj in range(j0, j1):
                    if v[qi, qj] > val:
                        keep = False
                        break
                    if v[qi, qj] == val and (qi < i or (qi == i and qj < j)):
                        keep = False
                        break
                if not keep:
                    break
            if keep:
                o[i, j] = 1
    return out


cdef double _bilinear(double[:, ::1] v, double x, double y, int h, int w):
    cdef int x0 = <int>x
    cdef int y0 = <int>y
    cdef double fx, fy
    if x0 > w - 2:
        x0 = w - 2
    if y0 > h - 2:
        y0 = h - 2
    if x0 < 0:
        x0 = 0
    if y0 < 0:
        y0 = 0
    fx = x - x0
    fy = y - y0
    if w == 1:
        x0 = 0
        fx = 0.0
    if h == 1:
        y0 = 0
        fy = 0.0
    cdef int x1 = x0 + 1
    cdef int y1 = y0 + 1
    if x1 > w - 1:
        x1 = w - 1
    if y1 > h - 1:
        y1 = h - 1
    return (v[y0, x0] * (1 - fx) * (1 - fy)
            + v[y0, x1] * fx * (1 - fy)
            + v[y1, x0] * (1 - fx) * fy
            + v[y1, x1] * fx * fy)


def line_integral(values, double ax, double ay, double bx, double by,
                  int n_samples):
    """Mean of bilinear samples at n points spaced evenly on segment ab."""
    cdef double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef int h = v.shape[0]
    cdef int w = v.shape[1]
    if ax == bx and ay == by:
        return _bilinear(v, ax, ay, h, w)
    cdef double total = 0.0
    cdef double t
    cdef int i
    for i in range(n_samples):
        t = i / <double>(n_samples - 1)
        total += _bilinear(v, ax + t * (bx - ax), ay + t * (by - ay), h, w)
    return total / n_samples
