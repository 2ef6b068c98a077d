"""Constants shared by both kernel backends."""

import numpy as np

# phase recurrence schedule, keyed on the absolute index k
RENORM_EVERY = 1 << 10
RESYNC_EVERY = 1 << 20

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX_A = np.uint64(0xBF58476D1CE4E5B9)
MIX_B = np.uint64(0x94D049BB133111EB)
TWO_M53 = 2.0**-53
SPLITTER = 134217729.0  # 2**27 + 1, Veltkamp split constant
