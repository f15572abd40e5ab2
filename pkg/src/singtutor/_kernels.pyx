# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels (fast path).

Mirrors singtutor._kernels_py exactly; see that module for the contract
of each function.
"""

from libc.math cimport log, sqrt

import numpy as np


def rms(double[::1] samples) -> float:
    cdef Py_ssize_t n = samples.shape[0]
    cdef Py_ssize_t i
    cdef double acc = 0.0
    if n == 0:
        return 0.0
    for i in range(n):
        acc += samples[i] * samples[i]
    return sqrt(acc / n)


def peak_interp(double[::1] mag, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t n = mag.shape[0]
    cdef Py_ssize_t i, k
    cdef double best, m1, m2, m3, y1, y2, y3, denom, delta
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
    y1 = log(m1)
    y2 = log(m2)
    y3 = log(m3)
    denom = y1 - 2.0 * y2 + y3
    if denom == 0.0:
        return k, 0.0
    delta = 0.5 * (y1 - y3) / denom
    if delta > 0.5:
        delta = 0.5
    elif delta < -0.5:
        delta = -0.5
    return k, delta


def trailing_mean(double[::1] t_ms, double[::1] values, double window_ms):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t i, j, start = 0
    cdef double acc, cutoff
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        cutoff = t_ms[i] - window_ms
        while t_ms[start] <= cutoff:
            start += 1
        acc = 0.0
        for j in range(start, i + 1):
            acc += values[j]
        out[i] = acc / (i - start + 1)
    return out_arr
