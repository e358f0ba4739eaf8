"""Kernel backend selection: numba-jitted or pure numpy.

The hot numeric loops (simplex pivoting, greedy covering) are written once
in a numba-compatible numpy subset.  By default they are compiled with
``numba.njit``; setting ``ROBUSTKIT_BACKEND=numpy`` (or running without
numba installed) keeps them as plain Python/numpy, which is slower but
behaves identically.  ``benchmarks/bench_backends.py`` compares the two.
"""

import os

_env = os.environ.get("ROBUSTKIT_BACKEND", "numba").strip().lower()

if _env not in ("numba", "numpy"):
    raise ValueError(f"ROBUSTKIT_BACKEND must be 'numba' or 'numpy', got {_env!r}")

if _env == "numba":
    try:
        import numba

        _HAVE_NUMBA = True
    except ImportError:
        _HAVE_NUMBA = False
else:
    _HAVE_NUMBA = False

USING_NUMBA = _HAVE_NUMBA


def jit_kernel(fn):
    """Compile ``fn`` with njit when the numba backend is active, else return
    it unchanged.  fastmath stays off so both paths produce the same floats."""
    if USING_NUMBA:
        return numba.njit(cache=True, fastmath=False)(fn)
    return fn


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"
