"""Compare the compiled kernels against the pure-Python fallback.

Run from the repo root:  python3 benchmarks/bench_kernels.py

Workloads mirror production use: RMS + band peak picking at the pitch
detector's frame/FFT sizes, and the trailing mean filter over an hour
of 100 Hz sensor data. End-to-end detect_pitch is timed under both
backends via the SINGTUTOR_PURE_PYTHON switch (subprocess, since the
backend is chosen at import).
"""

from __future__ import annotations

import os
import subprocess
import sys
import time

import numpy as np

from singtutor import _kernels_py

try:
    from singtutor import _kernels
except ImportError:
    _kernels = None

FRAME = 2205          # 50 ms at 44.1 kHz
SPECTRUM = 4097       # rfft bins of an 8192 FFT
BAND = (15, 222)      # 80..1200 Hz band at those sizes
SENSOR_HOUR = 360_000  # 1 h at 100 Hz


def timeit(fn, *args, repeat: int = 5) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels() -> None:
    rng = np.random.default_rng(0)
    frames = np.ascontiguousarray(rng.uniform(-1, 1, FRAME))
    spectrum = np.ascontiguousarray(np.abs(rng.normal(size=SPECTRUM)) + 1e-9)
    t_ms = np.ascontiguousarray(np.arange(SENSOR_HOUR) * 10.0)
    forces = np.ascontiguousarray(np.abs(rng.normal(10, 3, SENSOR_HOUR)))

    def run_rms(impl, n=200):
        for _ in range(n):
            impl.rms(frames)

    def run_peak(impl, n=200):
        for _ in range(n):
            impl.peak_interp(spectrum, *BAND)

    def run_mean(impl):
        impl.trailing_mean(t_ms, forces, 150.0)

    rows = []
    for name, run, unit in (
        ("rms (200 x 2205 samples)", run_rms, "ms"),
        ("peak_interp (200 x band scan)", run_peak, "ms"),
        ("trailing_mean (1 h @ 100 Hz)", run_mean, "ms"),
    ):
        py = timeit(run, _kernels_py) * 1000
        if _kernels is not None:
            cy = timeit(run, _kernels) * 1000
            rows.append((name, py, cy, py / cy))
        else:
            rows.append((name, py, None, None))

    print(f"{'kernel':<34} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, py, cy, speedup in rows:
        if cy is None:
            print(f"{name:<34} {py:>8.2f}ms {'-':>10} {'-':>8}")
        else:
            print(f"{name:<34} {py:>8.2f}ms {cy:>8.2f}ms {speedup:>7.1f}x")


DETECT_SNIPPET = """
import time
import numpy as np
from singtutor.pitch import PitchConfig, detect_pitch
from singtutor import kernels

cfg = PitchConfig()
t = np.arange(cfg.frame_samples) / cfg.sample_rate_hz
frame = np.sin(2 * np.pi * 261.63 * t)
detect_pitch(frame, cfg)  # warm caches
t0 = time.perf_counter()
for _ in range(200):
    detect_pitch(frame, cfg)
elapsed = (time.perf_counter() - t0) / 200
print(f"{kernels.BACKEND}: {elapsed * 1e6:.0f} us/frame "
      f"({0.05 / elapsed:.0f}x real time)")
"""


def bench_detect() -> None:
    print("\ndetect_pitch end-to-end (one 50 ms frame):")
    for pure in ("0", "1"):
        env = dict(os.environ, SINGTUTOR_PURE_PYTHON=pure)
        if pure == "0":
            env.pop("SINGTUTOR_PURE_PYTHON")
        out = subprocess.run([sys.executable, "-c", DETECT_SNIPPET],
                             env=env, capture_output=True, text=True, check=True)
        print(" ", out.stdout.strip())


if __name__ == "__main__":
    bench_kernels()
    bench_detect()
