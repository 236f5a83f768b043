"""Kernel backends against brute-force per-pixel oracles and each other.

Every test runs once per available backend (numpy fallback and, when
built, the compiled extension); a final group checks cross-backend
agreement so the two routes cannot silently drift apart.
"""

import math

import numpy as np
import pytest

from limbpose import kernels


def oracle_disk(h, w, cx, cy, r):
    out = np.zeros((h, w), dtype=np.uint8)
    for i in range(h):
        for j in range(w):
            if (j - cx) ** 2 + (i - cy) ** 2 <= r * r:
                out[i, j] = 1
    return out


def oracle_gaussian_disk(h, w, cx, cy, r, sigma):
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            d2 = (j - cx) ** 2 + (i - cy) ** 2
            if d2 <= r * r:
                out[i, j] = math.exp(-d2 / (2.0 * sigma * sigma))
    return out


def oracle_segment(h, w, ax, ay, bx, by, thickness):
    out = np.zeros((h, w), dtype=np.uint8)
    dx, dy = bx - ax, by - ay
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        return out
    half = thickness / 2.0
    for i in range(h):
        for j in range(w):
            px, py = j - ax, i - ay
            dot = px * dx + py * dy
            cross = px * dy - py * dx
            if 0.0 <= dot <= l2 and cross * cross <= half * half * l2:
                out[i, j] = 1
    return out


def oracle_gaussian_segment(h, w, ax, ay, bx, by, thickness, sigma):
    out = np.zeros((h, w))
    dx, dy = bx - ax, by - ay
    l2 = dx * dx + dy * dy
    if l2 == 0.0:
        return out
    half = thickness / 2.0
    for i in range(h):
        for j in range(w):
            px, py = j - ax, i - ay
            dot = px * dx + py * dy
            cross = px * dy - py * dx
            if 0.0 <= dot <= l2 and cross * cross <= half * half * l2:
                u = (dot - 0.5 * l2) / math.sqrt(l2)
                out[i, j] = math.exp(-(u * u) / (2.0 * sigma * sigma))
    return out


def oracle_local_maxima(values, window, threshold):
    h, w = values.shape
    half = window // 2
    out = np.zeros((h, w), dtype=np.uint8)
    for i in range(h):
        for j in range(w):
            v = values[i, j]
            if v < threshold:
                continue
            keep = True
            for qi in range(max(0, i - half), min(h, i + half + 1)):
                for qj in range(max(0, j - half), min(w, j + half + 1)):
                    if qi == i and qj == j:
                        continue
                    q = values[qi, qj]
                    if q > v or (q == v and (qi < i or (qi == i and qj < j))):
                        keep = False
                        break
                if not keep:
                    break
            if keep:
                out[i, j] = 1
    return out


def oracle_bilinear(values, x, y):
    h, w = values.shape
    x0 = min(max(int(math.floor(x)), 0), max(w - 2, 0))
    y0 = min(max(int(math.floor(y)), 0), max(h - 2, 0))
    fx, fy = x - x0, y - y0
    if w == 1:
        fx = 0.0
    if h == 1:
        fy = 0.0
    x1 = min(x0 + 1, w - 1)
    y1 = min(y0 + 1, h - 1)
    return (
        values[y0, x0] * (1 - fx) * (1 - fy)
        + values[y0, x1] * fx * (1 - fy)
        + values[y1, x0] * (1 - fx) * fy
        + values[y1, x1] * fx * fy
    )


def oracle_line_integral(values, ax, ay, bx, by, n):
    if ax == bx and ay == by:
        return oracle_bilinear(values, ax, ay)
    total = 0.0
    for i in range(n):
        t = i / (n - 1)
        total += oracle_bilinear(values, ax + t * (bx - ax), ay + t * (by - ay))
    return total / n


def test_disk_mask_matches_oracle(backend, rng):
    for _ in range(40):
        h, w = int(rng.integers(4, 40)), int(rng.integers(4, 40))
        cx = float(rng.uniform(-5, w + 5))
        cy = float(rng.uniform(-5, h + 5))
        r = float(rng.uniform(0.5, 9))
        got = backend.disk_mask(h, w, cx, cy, r)
        np.testing.assert_array_equal(got, oracle_disk(h, w, cx, cy, r))


def test_gaussian_disk_matches_oracle(backend, rng):
    for _ in range(25):
        h, w = int(rng.integers(4, 32)), int(rng.integers(4, 32))
        cx, cy = float(rng.uniform(0, w)), float(rng.uniform(0, h))
        r = float(rng.uniform(1, 8))
        sigma = float(rng.uniform(0.5, 20))
        got = backend.gaussian_disk(h, w, cx, cy, r, sigma)
        want = oracle_gaussian_disk(h, w, cx, cy, r, sigma)
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-13)
        # Support is exactly the binary disk.
        np.testing.assert_array_equal(got > 0, oracle_disk(h, w, cx, cy, r) > 0)


def test_segment_mask_matches_oracle(backend, rng):
    for _ in range(40):
        h, w = int(rng.integers(4, 36)), int(rng.integers(4, 36))
        ax, ay = float(rng.uniform(0, w)), float(rng.uniform(0, h))
        bx, by = float(rng.uniform(0, w)), float(rng.uniform(0, h))
        th = float(rng.uniform(0.5, 10))
        got = backend.segment_mask(h, w, ax, ay, bx, by, th)
        np.testing.assert_array_equal(got, oracle_segment(h, w, ax, ay, bx, by, th))
    # Degenerate: zero-length segment has empty support.
    assert backend.segment_mask(10, 10, 3.0, 3.0, 3.0, 3.0, 4.0).sum() == 0


def test_gaussian_segment_matches_oracle(backend, rng):
    for _ in range(25):
        h, w = int(rng.integers(4, 32)), int(rng.integers(4, 32))
        ax, ay = float(rng.uniform(0, w)), float(rng.uniform(0, h))
        bx, by = float(rng.uniform(0, w)), float(rng.uniform(0, h))
        th = float(rng.uniform(0.5, 8))
        sigma = float(rng.uniform(0.5, 20))
        got = backend.gaussian_segment(h, w, ax, ay, bx, by, th, sigma)
        want = oracle_gaussian_segment(h, w, ax, ay, bx, by, th, sigma)
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-13)


def test_local_maxima_matches_oracle(backend, rng):
    for _ in range(30):
        h, w = int(rng.integers(3, 30)), int(rng.integers(3, 30))
        values = rng.random((h, w))
        # Quantize so ties actually occur.
        values = np.round(values, 1)
        window = int(rng.choice([1, 3, 5, 7]))
        threshold = float(rng.uniform(0, 1))
        got = backend.local_maxima_mask(values, window, threshold)
        np.testing.assert_array_equal(got, oracle_local_maxima(values, window, threshold))


def test_local_maxima_plateau_keeps_lowest_row_major(backend):
    values = np.zeros((7, 7))
    values[3, 3] = values[3, 4] = values[4, 3] = 0.8
    mask = backend.local_maxima_mask(values, 3, 0.5)
    assert mask.sum() == 1
    assert mask[3, 3] == 1


def test_line_integral_matches_oracle(backend, rng):
    for _ in range(30):
        h, w = int(rng.integers(2, 24)), int(rng.integers(2, 24))
        values = rng.random((h, w))
        ax, ay = float(rng.uniform(0, w - 1)), float(rng.uniform(0, h - 1))
        bx, by = float(rng.uniform(0, w - 1)), float(rng.uniform(0, h - 1))
        n = int(rng.integers(2, 64))
        got = backend.line_integral(values, ax, ay, bx, by, n)
        want = oracle_line_integral(values, ax, ay, bx, by, n)
        assert got == pytest.approx(want, abs=1e-12)


def test_line_integral_degenerate_endpoint(backend, rng):
    values = rng.random((8, 8))
    got = backend.line_integral(values, 2.5, 3.5, 2.5, 3.5, 16)
    assert got == pytest.approx(oracle_bilinear(values, 2.5, 3.5), abs=1e-12)


def test_backends_agree_exactly(rng):
    backends = kernels.available_backends()
    if len(backends) < 2:
        pytest.skip("only one backend available")
    a, b = backends["numpy"], backends["native"]
    for _ in range(20):
        h, w = int(rng.integers(4, 40)), int(rng.integers(4, 40))
        cx, cy = float(rng.uniform(0, w)), float(rng.uniform(0, h))
        bx, by = float(rng.uniform(0, w)), float(rng.uniform(0, h))
        r = float(rng.uniform(0.5, 9))
        sigma = 3.0 * r
        np.testing.assert_array_equal(
            a.disk_mask(h, w, cx, cy, r), b.disk_mask(h, w, cx, cy, r)
        )
        np.testing.assert_array_equal(
            a.segment_mask(h, w, cx, cy, bx, by, r), b.segment_mask(h, w, cx, cy, bx, by, r)
        )
        np.testing.assert_allclose(
            a.gaussian_disk(h, w, cx, cy, r, sigma),
            b.gaussian_disk(h, w, cx, cy, r, sigma),
            rtol=0,
            atol=1e-15,
        )
        np.testing.assert_allclose(
            a.gaussian_segment(h, w, cx, cy, bx, by, r, sigma),
            b.gaussian_segment(h, w, cx, cy, bx, by, r, sigma),
            rtol=0,
            atol=1e-15,
        )
        values = np.round(rng.random((h, w)), 2)
        np.testing.assert_array_equal(
            a.local_maxima_mask(values, 5, 0.2), b.local_maxima_mask(values, 5, 0.2)
        )
        assert a.line_integral(values, cx, cy, bx, by, 32) == pytest.approx(
            b.line_integral(values, cx, cy, bx, by, 32), abs=1e-13
        )


def test_module_backend_is_exposed():
    assert kernels.BACKEND in kernels.available_backends()
