"""Pure-Python implementations of the hot numeric kernels.

These are the reference semantics for singtutor._kernels (the Cython
extension); the two must stay interchangeable. Selection happens in
singtutor.kernels at import time.
"""

from __future__ import annotations

import math


def rms(samples) -> float:
    """Root-mean-square of a sample block."""
    n = len(samples)
    if n == 0:
        return 0.0
    acc = 0.0
    for v in samples:
        acc += v * v
    return math.sqrt(acc / n)


def peak_interp(mag, lo: int, hi: int) -> tuple[int, float]:
    """Locate the largest magnitude bin in [lo, hi] and refine it.

    Returns (bin index, fractional offset). The offset comes from a
    parabola fitted to the log-magnitude of the peak and its two
    neighbours and is clamped to [-0.5, 0.5]; it is 0.0 when a
    neighbour is missing or any of the three magnitudes is non-positive.
    """
    n = len(mag)
    if n == 0 or lo > hi:
        raise ValueError("empty search range")
    if lo < 0 or hi >= n:
        raise ValueError("search range outside spectrum")
    k = lo
    best = mag[lo]
    for i in range(lo + 1, hi + 1):
        if mag[i] > best:
            best = mag[i]
            k = i
    if k == 0 or k == n - 1:
        return k, 0.0
    m1 = mag[k - 1]
    m2 = mag[k]
    m3 = mag[k + 1]
    if m1 <= 0.0 or m2 <= 0.0 or m3 <= 0.0:
        return k, 0.0
    y1 = math.log(m1)
    y2 = math.log(m2)
    y3 = math.log(m3)
    denom = y1 - 2.0 * y2 + y3
    if denom == 0.0:
        return k, 0.0
    delta = 0.5 * (y1 - y3) / denom
    if delta > 0.5:
        delta = 0.5
    elif delta < -0.5:
        delta = -0.5
    return k, delta


def trailing_mean(t_ms, values, window_ms: float):
    """Causal time-windowed mean: out[i] = mean of values[j] with
    t[i] - window < t[j] <= t[i].

    Timestamps must be non-decreasing. The mean is recomputed by direct
    summation per output sample (no running-sum drift), so the result is
    exactly the arithmetic mean of the window contents.
    """
    n = len(values)
    out = [0.0] * n
    start = 0
    for i in range(n):
        cutoff = t_ms[i] - window_ms
        while t_ms[start] <= cutoff:
            start += 1
        acc = 0.0
        for j in range(start, i + 1):
            acc += values[j]
        out[i] = acc / (i - start + 1)
    return out
