"""Kernel backend selection.

Pointwise kernels are compiled with numba when it is importable. Setting
``HYDRO_OLDROYD_BACKEND=numpy`` forces the vectorised numpy path; the value
``numba`` makes a missing numba an import-time error instead of a silent
fallback. The choice never changes the model, only how fast (and, at the
last-bit level, in which order) the pointwise arithmetic is carried out.
"""

import os

ENV_VAR = "HYDRO_OLDROYD_BACKEND"

_requested = os.environ.get(ENV_VAR, "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ImportError(f"{ENV_VAR} must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on the environment
    HAVE_NUMBA = False
    if _requested == "numba":
        raise

BACKEND = "numpy" if _requested == "numpy" or not HAVE_NUMBA else "numba"


def njit(func):
    """``numba.njit(cache=True)`` when numba is present, identity otherwise."""
    if not HAVE_NUMBA:
        return func
    from numba import njit as _njit

    return _njit(cache=True)(func)
