"""Exact prefix-maximum laws by exhaustive enumeration of small discrete cases."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels

MAX_STATES = 1 << 24
MERGE_TOL = 1e-9


@dataclass(frozen=True)
class DiscreteLaw:
    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probs) or not self.support:
            raise ValueError("support and probs must be nonempty and the same length")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support values must be distinct")
        if any(q < 0 for q in self.probs):
            raise ValueError("probabilities must be nonnegative")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")

    @classmethod
    def rademacher(cls) -> DiscreteLaw:
        return cls((-1.0, 1.0), (0.5, 0.5))

    @classmethod
    def point(cls, value: float = 0.0) -> DiscreteLaw:
        return cls((float(value),), (1.0,))


def _exact_phases(t: float, n: int):
    k = np.arange(1, n + 1, dtype=np.float64)
    return np.cos(k * t), np.sin(k * t)


def exact_prefix_max_distribution(law: DiscreteLaw, t: float, n: int) -> list[tuple[float, float]]:
    """Distribution of max_{k<=n} |S_k(t)| as (value, probability), values ascending.

    Values closer than a relative 1e-9 are one atom (they differ only by
    rounding along different summation paths); each atom is reported at its
    smallest member with its compensated total mass.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    s = len(law.support)
    if s**n > MAX_STATES:
        raise ValueError(f"state space {s}^{n} exceeds the enumeration guard of {MAX_STATES}")
    pr, pi = _exact_phases(float(t), n)
    values, masses = kernels.enumerate_prefix_max(
        np.array(law.support, dtype=np.float64), np.array(law.probs, dtype=np.float64), pr, pi
    )
    order = np.argsort(values, kind="stable")
    reps, tot = kernels.grouped_sums(values[order], masses[order], MERGE_TOL)
    return [(float(v), float(m)) for v, m in zip(reps, tot) if m > 0]


def exact_exceedance(law: DiscreteLaw, t: float, n: int, threshold: float) -> float:
    """P(max_{k<=n} |S_k(t)| > threshold), summed over the atoms above threshold."""
    dist = exact_prefix_max_distribution(law, t, n)
    return math.fsum(m for v, m in dist if v > threshold)


def rademacher_walk_exceedance(n: int, threshold: float) -> Fraction:
    """P(max_{k<=n} |S_k| > threshold) for a simple symmetric walk, by reflection.

    With b the smallest integer above the threshold, repeated reflection in
    the barriers +-b gives P(walk stays in (-b, b) up to n) as
    sum_j (-1)^j P(|S_n - 2jb| < b) over all integers j. Exact rational.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if threshold < 0:
        return Fraction(1)
    b = math.floor(threshold) + 1
    total = 2**n
    stay = 0
    jmax = n // (2 * b) + 2
    for j in range(-jmax, jmax + 1):
        lo = 2 * j * b - b
        hi = 2 * j * b + b
        # S_n = 2h - n for h heads; count h with lo < 2h - n < hi
        count = sum(math.comb(n, h) for h in range(n + 1) if lo < 2 * h - n < hi)
        stay += (-1) ** (j % 2) * count
    return 1 - Fraction(stay, total)
