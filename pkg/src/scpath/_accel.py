"""Optional numba acceleration.

Hot kernels are written once as plain loops and compiled with ``njit`` when
numba is importable. Set ``SCPATH_NUMBA=0`` to force the pure numpy/python
path (useful for debugging and for the kernel benchmark).
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("SCPATH_NUMBA", "1").lower() not in ("0", "false", "off", "no")


def njit(func):
    """Compile ``func`` in nopython mode; without numba return it unchanged.

    The undecorated function stays reachable as ``func.py_func`` either way so the
    benchmark can time both paths in one process.
    """
    if not HAVE_NUMBA:
        func.py_func = func
        return func
    return numba.njit(cache=True, nogil=True)(func)


def pick(compiled, fallback):
    """Select the active implementation of a kernel."""
    return compiled if USE_NUMBA else fallback
