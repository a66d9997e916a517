"""Optional numba acceleration.

Kernels are written once in a numba-compatible subset of Python. When numba
is available and ``POLYRA_DISABLE_NUMBA`` is unset (or ``0``), they are
compiled with ``@njit``; otherwise the decorator is the identity and the same
code runs as plain Python over numpy arrays.
"""

from __future__ import annotations

import os

_FLAG = "POLYRA_DISABLE_NUMBA"


def _numba_requested() -> bool:
    return os.environ.get(_FLAG, "0").strip().lower() in ("", "0", "false", "no")


try:  # pragma: no cover - depends on the environment
    if not _numba_requested():
        raise ImportError("numba disabled by environment")
    from numba import njit as _numba_njit

    NUMBA_ENABLED = True
except ImportError:  # pragma: no cover
    _numba_njit = None
    NUMBA_ENABLED = False


def njit(*args, **kwargs):
    """``numba.njit`` with ``cache=True`` by default, or a no-op fallback."""
    if NUMBA_ENABLED:
        kwargs.setdefault("cache", True)
        return _numba_njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def backend() -> str:
    return "numba" if NUMBA_ENABLED else "python"
