"""Counter-based random streams.

Every random quantity in the package is a pure function of a 64-bit seed and
a 1-based counter::

    uniform64(seed, k) = mix64(seed + k * GOLDEN_GAMMA)    (mod 2**64)

which is the SplitMix64 output sequence started at ``seed``. Per-replication
seeds come from :func:`derive_seed`, a bijection in the index for fixed
master seed, so replications never share a stream seed and can be dispatched
in any order.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
INDEX_MULT = 0xD1B54A32D192ED03  # odd, so index -> index * INDEX_MULT is a bijection
MASTER_SALT = 0x5851F42D4C957F2D
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer (a bijection on 64-bit words)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * MIX_B) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Seed for replication ``index`` under ``master``.

    ``mix64(mix64(master ^ MASTER_SALT) ^ (index * INDEX_MULT))``. For a fixed
    master this is a composition of bijections in ``index``, so distinct
    indices below 2**64 always give distinct seeds.
    """
    if master < 0 or index < 0:
        raise ValueError("master and index must be nonnegative")
    key = mix64(master ^ MASTER_SALT)
    return mix64(key ^ ((index * INDEX_MULT) & MASK64))


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_A)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_B)
    return z ^ (z >> np.uint64(31))


def derive_seeds(master: int, start: int, count: int) -> np.ndarray:
    """Vectorized :func:`derive_seed` for indices ``start .. start+count-1``."""
    if master < 0 or start < 0 or count < 0:
        raise ValueError("master, start and count must be nonnegative")
    key = np.uint64(mix64(master ^ MASTER_SALT))
    idx = np.arange(count, dtype=np.uint64) + np.uint64(start)
    return mix64_array(key ^ (idx * np.uint64(INDEX_MULT)))


def uniform_words(seed: int, k0: int, count: int) -> np.ndarray:
    """Raw 64-bit stream words for counters ``k0 .. k0+count-1``."""
    ks = np.arange(k0, k0 + count, dtype=np.uint64)
    return mix64_array(np.uint64(seed & MASK64) + ks * np.uint64(GOLDEN_GAMMA))


def uniforms(seed: int, count: int, k0: int = 1) -> np.ndarray:
    """Uniforms on (0, 1] from the top 53 bits of each stream word."""
    z = uniform_words(seed, k0, count)
    return ((z >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
