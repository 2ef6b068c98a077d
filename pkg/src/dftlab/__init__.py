"""dftlab: simulation and exact-oracle toolkit for complete convergence of
discrete Fourier transforms of identically distributed sequences.

Hot loops live in :mod:`dftlab.kernels`, compiled with numba by default;
``DFTLAB_BACKEND=numpy`` selects the pure-numpy fallback.
"""

__version__ = "0.1.0"

from ._backend import BACKEND, set_threads  # noqa: E402
from .distributions import (  # noqa: E402
    MomentProfile,
    PairwiseRademacher,
    PointMass,
    Rademacher,
    ScaledFamily,
    SymmetricPareto,
    sample,
)
from .monte_carlo import estimate_exceedance_curve, estimate_tail_prob  # noqa: E402
from .sequence_engine import dft_prefix_scan, phase_stream  # noqa: E402

__all__ = [
    "BACKEND",
    "MomentProfile",
    "PairwiseRademacher",
    "PointMass",
    "Rademacher",
    "ScaledFamily",
    "SymmetricPareto",
    "__version__",
    "dft_prefix_scan",
    "estimate_exceedance_curve",
    "estimate_tail_prob",
    "phase_stream",
    "sample",
    "set_threads",
]
