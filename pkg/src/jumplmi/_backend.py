"""Backend selection for the numerical kernels.

The heavy loops (Jacobi eigenvalue sweeps, per-trial simulation updates)
run through numba when it is available. Set JUMPLMI_BACKEND=numpy to force
the fallback implementations; JUMPLMI_BACKEND=numba requests numba and
degrades to numpy with a warning if the import fails.
"""

import os
import warnings

try:
    import numba
    HAS_NUMBA = True
except Exception:  # pragma: no cover - numba is present in the dev env
    numba = None
    HAS_NUMBA = False


def _pick_backend():
    requested = os.environ.get("JUMPLMI_BACKEND", "").strip().lower()
    if requested == "numpy":
        return "numpy"
    if requested == "numba":
        if HAS_NUMBA:
            return "numba"
        warnings.warn("JUMPLMI_BACKEND=numba requested but numba is not "
                      "importable; falling back to numpy")
        return "numpy"
    if requested:
        warnings.warn("unknown JUMPLMI_BACKEND=%r; using default" % requested)
    return "numba" if HAS_NUMBA else "numpy"


BACKEND = _pick_backend()
USING_NUMBA = BACKEND == "numba"


def maybe_jit(fn):
    """Compile fn with numba.njit when the numba backend is active."""
    if USING_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn
