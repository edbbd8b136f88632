"""Numba toggle shared by the hot kernels.

Set ``STEIN_DMC_NO_NUMBA=1`` to force the pure-numpy code paths (useful for
debugging and for the kernel benchmark).
"""

from __future__ import annotations

import os

_DISABLED = os.environ.get("STEIN_DMC_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    _njit = None
    HAS_NUMBA = False

numba_default = {
    "nogil": True,
    "cache": True,
    "fastmath": False,
    "error_model": "numpy",
}


def njit(func):
    """Compile ``func`` with numba when enabled, else return it unchanged."""
    if not HAS_NUMBA:
        return func
    return _njit(**numba_default)(func)


def use_numba() -> bool:
    return HAS_NUMBA
