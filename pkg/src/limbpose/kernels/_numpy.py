"""Pure numpy implementations of the per-pixel hot kernels.

Fallback backend used when the compiled extension is unavailable (or when
``LIMBPOSE_KERNELS=python`` is set).  Every function here must be
numerically interchangeable with its `_native` twin: binary masks agree
exactly, real-valued maps agree to within 1e-12.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import maximum_filter


def disk_mask(h: int, w: int, cx: float, cy: float, radius: float) -> np.ndarray:
    """Binary (h, w) mask of pixels within ``radius`` of (cx, cy), inclusive."""
    xs = np.arange(w, dtype=np.float64) - cx
    ys = np.arange(h, dtype=np.float64) - cy
    d2 = xs[None, :] * xs[None, :] + ys[:, None] * ys[:, None]
    return (d2 <= radius * radius).astype(np.uint8)


def gaussian_disk(h: int, w: int, cx: float, cy: float, radius: float, sigma: float) -> np.ndarray:
    """Gaussian bump exp(-d^2 / (2 sigma^2)) truncated to the radius disk."""
    xs = np.arange(w, dtype=np.float64) - cx
    ys = np.arange(h, dtype=np.float64) - cy
    d2 = xs[None, :] * xs[None, :] + ys[:, None] * ys[:, None]
    out = np.exp(-d2 / (2.0 * sigma * sigma))
    out[d2 > radius * radius] = 0.0
    return out


def segment_mask(
    h: int, w: int, ax: float, ay: float, bx: float, by: float, thickness: float
) -> np.ndarray:
    """Binary mask of the axis-aligned-to-segment rectangle around segment ab.

    A pixel is inside when its projection parameter onto ab lies in [0, 1]
    and its perpendicular distance to the segment line is at most
    ``thickness / 2``.  A degenerate segment (a == b) yields all zeros.
    """
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        return np.zeros((h, w), dtype=np.uint8)
    px = np.arange(w, dtype=np.float64)[None, :] - ax
    py = np.arange(h, dtype=np.float64)[:, None] - ay
    dot = px * dx + py * dy
    cross = px * dy - py * dx
    half = thickness / 2.0
    inside = (dot >= 0.0) & (dot <= l2) & (cross * cross <= half * half * l2)
    return inside.astype(np.uint8)


def gaussian_segment(
    h: int, w: int, ax: float, ay: float, bx: float, by: float,
    thickness: float, sigma: float,
) -> np.ndarray:
    """1-D Gaussian profile along segment ab inside its thickness rectangle.

    Within the same rectangle as :func:`segment_mask`, the value is
    exp(-u^2 / (2 sigma^2)) where u is the signed distance along the
    segment axis measured from the segment midpoint; the profile is
    constant across the thickness.  Zero outside.
    """
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        return np.zeros((h, w), dtype=np.float64)
    px = np.arange(w, dtype=np.float64)[None, :] - ax
    py = np.arange(h, dtype=np.float64)[:, None] - ay
    dot = px * dx + py * dy
    cross = px * dy - py * dx
    half = thickness / 2.0
    inside = (dot >= 0.0) & (dot <= l2) & (cross * cross <= half * half * l2)
    u = (dot - 0.5 * l2) / np.sqrt(l2)
    out = np.exp(-(u * u) / (2.0 * sigma * sigma))
    out[~inside] = 0.0
    return out


def local_maxima_mask(values: np.ndarray, window: int, threshold: float) -> np.ndarray:
    """Mask of strict local maxima of ``values`` over a window x window box.

    A pixel survives when its value is >= ``threshold`` and no pixel in its
    (border-clipped) neighbourhood has a larger value or an equal value at a
    lower row-major index.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    h, w = values.shape
    half = window // 2
    peak = maximum_filter(values, size=window, mode="constant", cval=-np.inf)
    cand = (values >= threshold) & (values == peak)
    out = np.zeros((h, w), dtype=np.uint8)
    for i, j in zip(*np.nonzero(cand)):
        i0, i1 = max(0, i - half), min(h, i + half + 1)
        j0, j1 = max(0, j - half), min(w, j + half + 1)
        keep = True
        v = values[i, j]
        for qi in range(i0, i1):
            if not keep:
                break
            for qj in range(j0, j1):
                if values[qi, qj] == v and (qi, qj) < (i, j):
                    keep = False
                    break
        if keep:
            out[i, j] = 1
    return out


def line_integral(
    values: np.ndarray, ax: float, ay: float, bx: float, by: float, n_samples: int
) -> float:
    """Mean of bilinear samples of ``values`` at n points spaced evenly on ab.

    The mean (rather than the sum) keeps the score independent of segment
    length.  For a == b the single bilinear sample at a is returned.
    """
    values = np.asarray(values, dtype=np.float64)
    h, w = values.shape
    if ax == bx and ay == by:
        return _bilinear(values, ax, ay, h, w)
    total = 0.0
    for i in range(n_samples):
        t = i / (n_samples - 1)
        total += _bilinear(values, ax + t * (bx - ax), ay + t * (by - ay), h, w)
    return total / n_samples


def _bilinear(values: np.ndarray, x: float, y: float, h: int, w: int) -> float:
    x0 = int(x)
    y0 = int(y)
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
        x0, fx = 0, 0.0
    if h == 1:
        y0, fy = 0, 0.0
    v00 = values[y0, x0]
    v01 = values[y0, min(x0 + 1, w - 1)]
    v10 = values[min(y0 + 1, h - 1), x0]
    v11 = values[min(y0 + 1, h - 1), min(x0 + 1, w - 1)]
    return (
        v00 * (1 - fx) * (1 - fy)
        + v01 * fx * (1 - fy)
        + v10 * (1 - fx) * fy
        + v11 * fx * fy
    )
