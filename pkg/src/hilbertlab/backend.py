"""Backend selection for the accelerated kernels.

HILBERTLAB_BACKEND=auto|numba|numpy (default auto: numba when importable,
numpy otherwise). The numpy lane is a portability/debugging fallback; the
numba lane is what the heavy experiments are sized for.
"""

import os
import warnings

_VALID = ("auto", "numba", "numpy")


def _resolve() -> str:
    req = os.environ.get("HILBERTLAB_BACKEND", "auto").strip().lower()
    if req not in _VALID:
        raise ValueError(f"HILBERTLAB_BACKEND must be one of {_VALID}, got {req!r}")
    if req == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if req == "numba":
            raise
        warnings.warn("numba not importable; falling back to numpy kernels")
        return "numpy"
    return "numba"


BACKEND = _resolve()


def set_workers(n: int) -> int:
    """Clamp and apply a worker-pool size; returns the effective value.

    Results are byte-identical for any pool size: parallel kernels only fill
    per-index slots and all reductions are order-independent.
    """
    n = max(1, int(n))
    if BACKEND != "numba":
        return 1
    import numba

    eff = min(n, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(eff)
    return eff
