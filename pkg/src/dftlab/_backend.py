"""Kernel backend selection.

Set ``DFTLAB_BACKEND=numpy`` to force the pure-numpy kernels; the default is
``numba`` whenever numba imports cleanly.
"""

import os

_requested = os.environ.get("DFTLAB_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"DFTLAB_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

BACKEND = _requested
if BACKEND == "numba":
    try:
        import numba

        # try OpenMP before TBB: an outdated system TBB makes numba warn on
        # every first parallel launch. Results do not depend on the layer.
        if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
            numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]
    except ImportError:  # pragma: no cover - numba is a declared dependency
        BACKEND = "numpy"


def set_threads(n: int) -> int:
    """Set the worker thread count for parallel kernels; return the count in effect.

    Results never depend on this value. Requests above the numba pool size
    are clamped.
    """
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if BACKEND != "numba":
        return 1
    import numba

    n = min(n, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(n)
    return n
