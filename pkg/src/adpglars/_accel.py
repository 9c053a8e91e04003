"""JIT switch for the numeric kernels.

Kernels in :mod:`adpglars._kernels` are written in the numba-compatible
subset of numpy. With ``GLARS_JIT=0`` (or numba missing) they run as plain
Python over numpy, which is the reference path used by the benchmark.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

JIT_ENABLED = numba is not None and os.environ.get("GLARS_JIT", "1").strip().lower() not in {
    "0",
    "false",
    "no",
    "off",
}


def njit(fn):
    """Compile ``fn`` with numba when enabled; always expose ``fn.py_func``."""
    if JIT_ENABLED:
        return numba.njit(cache=True)(fn)
    fn.py_func = fn
    return fn


def backend_name():
    return "numba" if JIT_ENABLED else "numpy"
