"""Numba availability switch.

Set ``PAMLAB_DISABLE_NUMBA=1`` to make the public kernels dispatch to their
pure-numpy implementations. The compiled variants stay importable (when numba
is installed) so the benchmark can compare both in one process.
"""

import os

DISABLED = os.environ.get("PAMLAB_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, else the identity decorator."""
    if _njit is not None:
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
