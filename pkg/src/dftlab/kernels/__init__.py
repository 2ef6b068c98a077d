"""Hot loops, dispatched to numba or numpy per ``DFTLAB_BACKEND``."""

from .._backend import BACKEND
from ._common import RENORM_EVERY, RESYNC_EVERY  # noqa: F401

if BACKEND == "numba":
    from ._jit import (  # noqa: F401
        accumulate_rows,
        enumerate_prefix_max,
        grid_max_sq,
        grouped_sums,
        pairwise_block,
        phase_block,
        scan,
        uniform_sign_block,
    )
else:
    from ._vec import (  # noqa: F401
        accumulate_rows,
        enumerate_prefix_max,
        grid_max_sq,
        grouped_sums,
        pairwise_block,
        phase_block,
        scan,
        uniform_sign_block,
    )
