"""Numba/pure-Python backend selection.

Hot kernels are written as scalar functions and JIT-compiled with numba by
default.  Setting ``OPINIONSHIFT_NO_NUMBA=1`` (or installing without numba)
selects the pure-Python/NumPy fallback: the same kernels run undecorated.
``benchmarks/bench_backends.py`` compares the two paths.
"""

import os

_TRUTHY = {"1", "true", "yes", "on"}


def _resolve_backend() -> bool:
    if os.environ.get("OPINIONSHIFT_NO_NUMBA", "").strip().lower() in _TRUTHY:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _resolve_backend()

if NUMBA_ENABLED:
    from numba import njit as _numba_njit

    def njit(func=None, **kwargs):
        kwargs.setdefault("cache", True)
        if func is not None:
            return _numba_njit(**kwargs)(func)
        return _numba_njit(**kwargs)

else:

    def njit(func=None, **kwargs):
        if func is not None:
            return func
        return lambda f: f


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "python"
