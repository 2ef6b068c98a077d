"""Transforms of a realized sequence: DFT prefix scans, truncation, splitting."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import kernels

DEFAULT_CHECKPOINTS = 64


@dataclass(frozen=True)
class PrefixScanResult:
    """One scan of S_k(t) = sum_{j<=k} e^{ijt} x_j over k = 1..n."""

    t: float
    n: int
    final_sum: complex
    prefix_max: float
    checkpoint_k: np.ndarray
    checkpoint_sums: np.ndarray

    @property
    def checkpoints(self) -> list[tuple[int, float]]:
        """(k, |S_k(t)|) at the checkpoint grid."""
        mags = np.sqrt(self.checkpoint_sums.real**2 + self.checkpoint_sums.imag**2)
        return [(int(k), float(m)) for k, m in zip(self.checkpoint_k, mags)]


@dataclass(frozen=True)
class SplitSequence:
    low: np.ndarray
    high: np.ndarray
    threshold: float


def geometric_checkpoints(n: int, count: int = DEFAULT_CHECKPOINTS) -> np.ndarray:
    """About ``count`` geometrically spaced indices in [1, n], always including 1 and n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ks = np.unique(np.round(np.geomspace(1, n, num=max(count, 2))).astype(np.int64))
    return np.union1d(ks, [1, n]).astype(np.int64)


def _check_t(t: float) -> float:
    t = float(t)
    if not -math.pi <= t < math.pi:
        raise ValueError(f"t must lie in [-pi, pi), got {t}")
    return t


def _as_sequence(xs) -> np.ndarray:
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    if xs.ndim != 1 or xs.size == 0:
        raise ValueError("sequence must be a nonempty 1-d array")
    return xs


def dft_prefix_scan(xs, t: float, checkpoints=None) -> PrefixScanResult:
    """Single pass over xs with an incremental phase recurrence.

    The phase e^{ikt} is advanced by one complex multiply per step,
    renormalized to unit modulus every 1024 steps and recomputed directly
    every 2**20 steps. Negative t reuses the |t| arithmetic and conjugates,
    so scans at t and -t have identical prefix maxima. The maximum is tracked
    on |S_k|^2, so entries below about 1e-154 in magnitude underflow.
    """
    xs = _as_sequence(xs)
    t = _check_t(t)
    n = xs.size
    if checkpoints is None:
        ck = geometric_checkpoints(n)
    else:
        ck = np.unique(np.asarray(checkpoints, dtype=np.int64))
        if ck.size and (ck[0] < 1 or ck[-1] > n):
            raise ValueError("checkpoints must lie in [1, n]")
    sr, si, best, out_r, out_i = kernels.scan(xs, t, ck)
    return PrefixScanResult(
        t=t,
        n=n,
        final_sum=complex(sr, si),
        prefix_max=math.sqrt(best),
        checkpoint_k=ck,
        checkpoint_sums=out_r + 1j * out_i,
    )


def phase_stream(t: float, n: int, chunk: int = 1 << 16) -> Iterator[np.ndarray]:
    """Yield e^{ikt} for k = 1..n in blocks, on the scan's recurrence schedule."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ta = abs(float(t))
    zr, zi = math.cos(ta), math.sin(ta)
    for k0 in range(1, n + 1, chunk):
        cnt = min(chunk, n - k0 + 1)
        ph, zr, zi = kernels.phase_block(ta, k0, cnt, zr, zi)
        yield np.conj(ph) if t < 0 else ph


def phases(t: float, n: int) -> np.ndarray:
    return np.concatenate(list(phase_stream(t, n)))


def truncate_at_index(xs) -> tuple[np.ndarray, int]:
    """y_k = x_k 1{|x_k| <= k}, and the number of entries that changed."""
    xs = _as_sequence(xs)
    ks = np.arange(1, xs.size + 1, dtype=np.float64)
    keep = np.abs(xs) <= ks
    ys = np.where(keep, xs, 0.0)
    mismatch = int(np.count_nonzero(ys != xs))
    return ys, mismatch


def split_at_threshold(xs, c: float) -> SplitSequence:
    """x = low + high with low = x 1{|x| <= c}; ties go to low."""
    if c < 0:
        raise ValueError(f"threshold must be >= 0, got {c}")
    xs = np.asarray(xs, dtype=np.float64)
    keep = np.abs(xs) <= c
    return SplitSequence(low=np.where(keep, xs, 0.0), high=np.where(keep, 0.0, xs), threshold=float(c))


def weighted_fourier_series(ys, t: float, checkpoints=None) -> PrefixScanResult:
    """Scan of sum_{k<=n} e^{ikt} y_k / k; checkpoint_sums are the partial sums."""
    ys = _as_sequence(ys)
    return dft_prefix_scan(ys / np.arange(1, ys.size + 1, dtype=np.float64), t, checkpoints)


def write_trajectory_csv(path, rows) -> None:
    """Rows of (label, t, k, magnitude)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "t", "k", "magnitude"])
        for label, t, k, mag in rows:
            w.writerow([label, format(float(t), ".17g"), int(k), format(float(mag), ".17g")])
