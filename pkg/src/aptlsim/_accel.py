"""Kernel compilation toggle.

The hot kernels in :mod:`aptlsim._kernels` are compiled with numba by
default. Setting the environment variable ``APTLSIM_NUMBA=0`` (before
import) selects the pure NumPy/Python fallback path instead; results are
identical, only slower. ``benchmarks/compare_numba.py`` times the two.
"""

import os

USE_NUMBA = os.environ.get("APTLSIM_NUMBA", "1").lower() not in (
    "0", "false", "off")

if USE_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:
        USE_NUMBA = False

if USE_NUMBA:
    def jit(func):
        return _njit(cache=True)(func)
else:
    def jit(func):
        return func
