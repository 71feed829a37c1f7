"""Numba availability switch.

Hot kernels are compiled with ``@njit`` when numba is importable and the
``POPEVO_NO_NUMBA`` environment variable is unset/0. Otherwise callers fall
back to vectorized numpy implementations. The flag is read once at import.
"""
import os

__all__ = ["NUMBA_ENABLED", "njit", "prange"]


def _identity_decorator(*args, **kwargs):
    def wrap(fn):
        return fn

    if args and callable(args[0]) and len(args) == 1 and not kwargs:
        return args[0]
    return wrap


if os.environ.get("POPEVO_NO_NUMBA", "0").strip() not in ("", "0"):
    NUMBA_ENABLED = False
else:
    try:
        from numba import njit, prange  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    njit = _identity_decorator
    prange = range
