"""Numeric kernel backend selection.

The compiled Cython extension (singtutor._kernels) is preferred; the
pure-Python module (singtutor._kernels_py) is the fallback when the
extension was not built. Set SINGTUTOR_PURE_PYTHON=1 to force the
fallback (used by the benchmark to compare both).

Contract for callers: array arguments are C-contiguous float64 numpy
arrays; trailing_mean returns an array-like of the same length.
"""

from __future__ import annotations

import os

BACKEND = "python"

if not os.environ.get("SINGTUTOR_PURE_PYTHON"):
    try:
        from singtutor._kernels import peak_interp, rms, trailing_mean  # noqa: F401

        BACKEND = "compiled"
    except ImportError:
        pass

if BACKEND == "python":
    from singtutor._kernels_py import peak_interp, rms, trailing_mean  # noqa: F401

__all__ = ["BACKEND", "peak_interp", "rms", "trailing_mean"]
