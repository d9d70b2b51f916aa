"""Numba acceleration switch.

Hot kernels ship in two forms: an ``@njit`` loop version and a vectorized
pure-numpy version. Set ``SPOOFGUARD_NO_NUMBA=1`` to force the numpy path
(also taken automatically when numba is not importable). The selection is
made once at import time; ``benchmarks/bench_kernels.py`` times both paths
side by side.
"""

import os

__all__ = ["NUMBA_ENABLED", "njit", "prange"]


def _flag_disabled() -> bool:
    val = os.environ.get("SPOOFGUARD_NO_NUMBA", "").strip().lower()
    return val in ("1", "true", "yes", "on")


if _flag_disabled():
    NUMBA_ENABLED = False
else:
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    from numba import njit, prange
else:
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

    prange = range
