"""Numba acceleration plumbing.

The hot kernels in :mod:`besselexp._kernels` are compiled with ``numba.njit``
when numba is importable.  Setting ``BESSELEXP_DISABLE_JIT=1`` (or numba's own
``NUMBA_DISABLE_JIT=1``) in the environment selects the pure-Python/numpy
fallback: the same kernel source runs interpreted, producing the same random
streams draw for draw.
"""

import os

_ENV_FLAGS = ("BESSELEXP_DISABLE_JIT", "NUMBA_DISABLE_JIT")


def _jit_wanted() -> bool:
    for flag in _ENV_FLAGS:
        if os.environ.get(flag, "").strip() not in ("", "0", "false", "False"):
            return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _jit_wanted()

if NUMBA_ENABLED:
    import numba

    def jit_kernel(fn):
        return numba.njit(cache=True)(fn)

else:

    def jit_kernel(fn):
        return fn


def backend() -> str:
    """Name of the active kernel backend: ``"numba"`` or ``"python"``."""
    return "numba" if NUMBA_ENABLED else "python"
