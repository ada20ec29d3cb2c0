"""Numba switch.

Set ``DIVERSE_ENSEMBLES_DISABLE_NUMBA=1`` to force the pure-numpy kernels.
Numba is also skipped silently when it cannot be imported.
"""
import os

_FLAG = "DIVERSE_ENSEMBLES_DISABLE_NUMBA"

USE_NUMBA = os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if not USE_NUMBA:

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
