"""Numba acceleration switch.

Hot kernels are compiled with ``numba.njit`` unless the environment variable
``ADAPTSAFE_DISABLE_NJIT`` is set to a non-empty value other than ``0``, or
numba is not importable.  The un-jitted fallback runs the same source as
plain numpy code.
"""

import os

DISABLE_ENV = "ADAPTSAFE_DISABLE_NJIT"


def jit_disabled_by_env() -> bool:
    return os.environ.get(DISABLE_ENV, "0") not in ("", "0")


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


JIT_ENABLED = numba_available() and not jit_disabled_by_env()


def compile_kernel(func):
    """Return an njit-compiled copy of ``func`` (cached on disk)."""
    from numba import njit

    return njit(cache=True)(func)
