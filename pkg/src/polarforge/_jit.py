"""Numba switch for the hot kernels.

Set ``POLARFORGE_NUMBA=0`` to force the pure-numpy code paths (also used
automatically when numba cannot be imported).
"""

import os

_flag = os.environ.get("POLARFORGE_NUMBA", "1").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

USE_NUMBA = numba is not None and _flag not in ("0", "false", "no", "off")


def njit(f):
    """``numba.njit`` with the package options, or a no-op without numba."""
    if numba is None:
        return f
    return numba.njit(f, cache=True, nogil=True)
