"""Reproducible Monte Carlo estimates of P(max_{k<=n} |S_k(t)| > threshold).

Replication ``j`` of an estimate draws its path from
``derive_seed(master_seed, index_offset + j)``. Each replication yields a 0/1
hit and the hits are summed as integers, so the estimate does not depend on
batch layout, execution order or thread count.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from . import kernels
from .distributions import DistributionSpec, draw_block, max_length
from .rng import derive_seeds
from .sequence_engine import phases

DEFAULT_REPS = 10_000
MIN_REPS = 100
BLOCK_CELLS = 1 << 21
BLOCK_LEN = 4096


@dataclass(frozen=True)
class TailProbEstimate:
    n: int
    t: float
    threshold: float
    hits: int
    reps: int
    p_hat: float
    ci_low: float
    ci_high: float
    epsilon: float = math.nan
    r: float = math.nan


@dataclass(frozen=True)
class ExceedanceCurve:
    spec: DistributionSpec
    p: float
    r: float
    epsilon: float
    t: float
    points: list[TailProbEstimate] = field(default_factory=list)

    @property
    def n(self) -> np.ndarray:
        return np.array([pt.n for pt in self.points], dtype=np.int64)

    @property
    def p_hat(self) -> np.ndarray:
        return np.array([pt.p_hat for pt in self.points])


def wilson_interval(hits: int, reps: int, confidence: float = 0.99) -> tuple[float, float]:
    if reps <= 0:
        raise ValueError("reps must be positive")
    if not 0 <= hits <= reps:
        raise ValueError("hits must lie in [0, reps]")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    ph = hits / reps
    z2n = z * z / reps
    center = (ph + z2n / 2) / (1 + z2n)
    half = z / (1 + z2n) * math.sqrt(ph * (1 - ph) / reps + z2n / (4 * reps))
    lo = 0.0 if hits == 0 else max(0.0, min(ph, center - half))
    hi = 1.0 if hits == reps else min(1.0, max(ph, center + half))
    return lo, hi


def count_exceedances(spec: DistributionSpec, t: float, n: int, threshold: float, seeds) -> int:
    """Number of seeds whose path has max_{k<=n} |S_k(t)| > threshold."""
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    cap = max_length(spec)
    if cap is not None and n > cap:
        raise ValueError(f"{spec.label} yields only {cap} variables, requested n={n}")
    ph = phases(t, n)
    block = min(n, BLOCK_LEN)
    rows = max(1, BLOCK_CELLS // block)
    hits = 0
    for b0 in range(0, seeds.size, rows):
        live = seeds[b0 : b0 + rows]
        sr = np.zeros(live.size)
        si = np.zeros(live.size)
        for k0 in range(1, n + 1, block):
            cnt = min(block, n - k0 + 1)
            xs = draw_block(spec, live, k0, cnt)
            hit = np.zeros(live.size, dtype=np.uint8)
            kernels.accumulate_rows(xs, ph[k0 - 1 : k0 - 1 + cnt], sr, si, hit, float(threshold))
            done = hit.astype(bool)
            if done.any():
                hits += int(done.sum())
                keep = ~done
                live, sr, si = live[keep], sr[keep], si[keep]
                if live.size == 0:
                    break
    return hits


def estimate_exceedance(
    spec: DistributionSpec,
    t: float,
    n: int,
    threshold: float,
    reps: int,
    master_seed: int,
    index_offset: int = 0,
) -> TailProbEstimate:
    if not -math.pi <= t < math.pi:
        raise ValueError(f"t must lie in [-pi, pi), got {t}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if reps < 1:
        raise ValueError("reps must be positive")
    if not threshold >= 0:
        raise ValueError("threshold must be >= 0")
    seeds = derive_seeds(master_seed, index_offset, reps)
    hits = count_exceedances(spec, t, n, threshold, seeds)
    lo, hi = wilson_interval(hits, reps)
    return TailProbEstimate(n, float(t), float(threshold), hits, reps, hits / reps, lo, hi)


def estimate_tail_prob(
    spec: DistributionSpec,
    t: float,
    n: int,
    epsilon: float,
    r: float,
    reps: int,
    master_seed: int,
    index_offset: int = 0,
) -> TailProbEstimate:
    """P(max_{k<=n} |S_k(t)| > epsilon * n^(1/r)) by ``reps`` replications."""
    if reps < MIN_REPS:
        raise ValueError(f"reps must be >= {MIN_REPS}, got {reps}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if not 1 <= r < 2:
        raise ValueError(f"r must lie in [1, 2), got {r}")
    est = estimate_exceedance(spec, t, n, epsilon * n ** (1.0 / r), reps, master_seed, index_offset)
    return TailProbEstimate(
        est.n, est.t, est.threshold, est.hits, est.reps, est.p_hat, est.ci_low, est.ci_high, epsilon, r
    )


def geometric_grid(n0: int, gamma: float, points: int) -> list[int]:
    """n_j = ceil(n0 * gamma^j), j < points."""
    if n0 < 1 or gamma <= 1 or points < 1:
        raise ValueError("need n0 >= 1, gamma > 1, points >= 1")
    grid = [math.ceil(n0 * gamma**j - 1e-9) for j in range(points)]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"grid is not strictly increasing: {grid}")
    return grid


def with_dense_head(grid, head: int = 64) -> list[int]:
    """Union of every n <= min(head, max(grid)) with ``grid``."""
    top = max(grid)
    return sorted(set(range(1, min(head, top) + 1)) | set(int(n) for n in grid))


def estimate_exceedance_curve(
    spec: DistributionSpec,
    t: float,
    n_grid,
    epsilon: float,
    r: float,
    reps: int,
    master_seed: int,
    p: float = math.nan,
) -> ExceedanceCurve:
    """One estimate per grid point; point i uses seed indices [i*reps, (i+1)*reps)."""
    n_grid = [int(n) for n in n_grid]
    if not n_grid or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n_grid must be nonempty and strictly increasing")
    points = [
        estimate_tail_prob(spec, t, n, epsilon, r, reps, master_seed, index_offset=i * reps)
        for i, n in enumerate(n_grid)
    ]
    return ExceedanceCurve(spec, p, r, epsilon, float(t), points)


CURVE_HEADER = ["spec_label", "t", "n", "epsilon", "r", "reps", "hits", "p_hat", "ci_low", "ci_high"]


def _g(x) -> str:
    return format(float(x), ".17g")


def curve_rows(curve: ExceedanceCurve) -> list[list[str]]:
    return [
        [curve.spec.label, _g(curve.t), str(pt.n), _g(curve.epsilon), _g(curve.r), str(pt.reps),
         str(pt.hits), _g(pt.p_hat), _g(pt.ci_low), _g(pt.ci_high)]
        for pt in curve.points
    ]


def write_curves_csv(path, curves) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for c in curves:
            w.writerows(curve_rows(c))
