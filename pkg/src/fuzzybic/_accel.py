"""Backend selection for the hot kernels.

Set ``FUZZYBIC_BACKEND=numpy`` (or ``FUZZYBIC_DISABLE_NUMBA=1``) before import
to force the pure-numpy path. Numba is used by default when importable.
"""
import os

_flag = os.environ.get("FUZZYBIC_BACKEND", "").strip().lower()
_disabled = _flag == "numpy" or os.environ.get("FUZZYBIC_DISABLE_NUMBA", "") not in ("", "0")

try:
    if _disabled:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


BACKEND = "numba" if HAVE_NUMBA else "numpy"
