"""Finite-horizon verdicts on the series and inequalities of the rate theory.

Convergence of a series cannot be observed from finitely many terms, so
:func:`classify_series` returns ``Indeterminate`` whenever the evidence lies in
a declared dead band instead of guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .distributions import (
    DistributionSpec,
    ScaledFamily,
    draw_block,
    moment_abs,
    sample,
    tail_first_moment,
    tail_first_moments,
    truncated_second_moment,
    truncated_second_moments,
)
from .monte_carlo import ExceedanceCurve, TailProbEstimate
from .sequence_engine import (
    PrefixScanResult,
    dft_prefix_scan,
    split_at_threshold,
    weighted_fourier_series,
)

DEFAULT_TOL = 0.01
DEFAULT_MARGIN = 0.1
MIN_SERIES_POINTS = 4


class Classification(str, Enum):
    CONVERGENT = "Convergent"
    DIVERGENT = "Divergent"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class SeriesDiagnostic:
    label: str
    weights_exponent: float
    partial_sums: list[tuple[int, float]]
    fitted_decay: float
    classification: Classification
    tolerance_used: float
    margin: float = DEFAULT_MARGIN

    @property
    def total(self) -> float:
        return self.partial_sums[-1][1]

    @property
    def last_increment_ratio(self) -> float:
        last, _ = _block_increments(self.partial_sums)
        return last / self.total if self.total > 0 else 0.0

    def verdict_row(self) -> list[str]:
        return [self.label, _g(self.weights_exponent), _g(self.total), _g(self.fitted_decay), self.classification.value]


VERDICT_HEADER = ["label", "beta", "total", "fitted_decay", "classification"]


def _g(x) -> str:
    return format(float(x), ".17g")


def _value_at_or_before(partial_sums, n):
    best = 0.0
    for m, v in partial_sums:
        if m <= n:
            best = v
        else:
            break
    return best


def _block_increments(partial_sums):
    """Increments over the last two dyadic blocks (N/2, N] and (N/4, N/2]."""
    n_last, total = partial_sums[-1]
    half = _value_at_or_before(partial_sums, n_last / 2)
    quarter = _value_at_or_before(partial_sums, n_last / 4)
    return total - half, half - quarter


def classify_series(partial_sums, fitted_decay, weights_exponent, tol=DEFAULT_TOL, margin=DEFAULT_MARGIN):
    """Three-way verdict from partial sums and the fitted term decay.

    Convergent: last dyadic-block increment < tol * total and
    fitted_decay + weights_exponent < -1 - margin.
    Divergent: block increments not shrinking, or
    fitted_decay + weights_exponent > -1 + margin.
    Otherwise Indeterminate. A series of all-zero terms is Convergent.
    """
    partial_sums = [(int(n), float(v)) for n, v in partial_sums]
    if len(partial_sums) < MIN_SERIES_POINTS:
        raise ValueError(f"need at least {MIN_SERIES_POINTS} partial sums, got {len(partial_sums)}")
    total = partial_sums[-1][1]
    if total == 0:
        return Classification.CONVERGENT
    last_inc, prev_inc = _block_increments(partial_sums)
    slope = fitted_decay + weights_exponent
    if last_inc < tol * total and slope < -1 - margin:
        return Classification.CONVERGENT
    if (last_inc > 0 and last_inc >= prev_inc) or slope > -1 + margin:
        return Classification.DIVERGENT
    return Classification.INDETERMINATE


def fit_decay(ns, terms) -> float:
    """OLS slope of log(term) on log(n) over the upper half of the grid (log scale).

    Zero terms are dropped; with fewer than two positive terms left the terms
    are taken to vanish and the slope is -inf.
    """
    ns = np.asarray(ns, dtype=np.float64)
    terms = np.asarray(terms, dtype=np.float64)
    lo = math.sqrt(ns.min() * ns.max())
    sel = (ns >= lo) & (terms > 0)
    if np.count_nonzero(sel) < 2:
        return -math.inf
    slope, _ = np.polyfit(np.log(ns[sel]), np.log(terms[sel]), 1)
    return float(slope)


def _interpolate_terms(ns, ps):
    """p at every integer in [ns[0], ns[-1]]: exact at grid points, log-linear between
    (linear when an endpoint is zero)."""
    n_all = np.arange(ns[0], ns[-1] + 1, dtype=np.int64)
    seg = np.clip(np.searchsorted(ns, n_all, side="right") - 1, 0, len(ns) - 2)
    a = ns[seg].astype(np.float64)
    b = ns[seg + 1].astype(np.float64)
    pa = ps[seg]
    pb = ps[seg + 1]
    x = n_all.astype(np.float64)
    frac_lin = (x - a) / (b - a)
    out = pa + frac_lin * (pb - pa)
    pos = (pa > 0) & (pb > 0)
    if pos.any():
        frac_log = (np.log(x[pos]) - np.log(a[pos])) / (np.log(b[pos]) - np.log(a[pos]))
        out[pos] = np.exp(np.log(pa[pos]) + frac_log * (np.log(pb[pos]) - np.log(pa[pos])))
    exact = np.isin(n_all, ns)
    out[exact] = ps[np.searchsorted(ns, n_all[exact])]
    return n_all, out


def weighted_series(ns, ps, beta, tol=DEFAULT_TOL, margin=DEFAULT_MARGIN, label="series") -> SeriesDiagnostic:
    """Partial sums of sum_n n^beta p(n) over the integer span of the grid."""
    ns = np.asarray(ns, dtype=np.int64)
    ps = np.asarray(ps, dtype=np.float64)
    if ns.size < MIN_SERIES_POINTS:
        raise ValueError(f"grid too sparse: {ns.size} points, need >= {MIN_SERIES_POINTS}")
    if np.any(np.diff(ns) <= 0):
        raise ValueError("grid must be strictly increasing")
    if np.any(ps < 0):
        raise ValueError("terms must be nonnegative")
    n_all, p_all = _interpolate_terms(ns, ps)
    terms = n_all.astype(np.float64) ** beta * p_all
    cums = np.cumsum(terms)
    idx = ns - ns[0]
    partial = [(int(n), float(cums[i])) for n, i in zip(ns, idx)]
    decay = fit_decay(ns, ps)
    cls = classify_series(partial, decay, beta, tol, margin)
    return SeriesDiagnostic(label, float(beta), partial, decay, cls, tol, margin)


def baum_katz_series(curve: ExceedanceCurve, p: float, r: float, tol=DEFAULT_TOL, margin=DEFAULT_MARGIN,
                     label: str | None = None) -> SeriesDiagnostic:
    """sum_n n^(p/r-2) P(max_{k<=n}|S_k(t)| > eps n^(1/r)) from an exceedance curve."""
    if not curve.points:
        raise ValueError("curve is empty")
    if not 1 < p < 2 or not 1 <= r <= p:
        raise ValueError(f"need 1 < p < 2 and 1 <= r <= p, got p={p}, r={r}")
    label = label or f"baum_katz[{curve.spec.label},t={curve.t:.6g}]"
    return weighted_series(curve.n, curve.p_hat, p / r - 2.0, tol, margin, label)


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def dyadic_series(estimates, p: float, tol=DEFAULT_TOL, margin=DEFAULT_MARGIN, label="dyadic") -> SeriesDiagnostic:
    """Partial sums of sum_N p(2^N). ``estimates`` are TailProbEstimates or (n, p) pairs."""
    pairs = [(e.n, e.p_hat) if isinstance(e, TailProbEstimate) else (int(e[0]), float(e[1])) for e in estimates]
    if any(not _is_power_of_two(n) for n, _ in pairs):
        raise ValueError("dyadic_series needs estimates at n = 2^N only")
    big_n = np.array([n.bit_length() - 1 for n, _ in pairs], dtype=np.int64)
    vals = np.array([v for _, v in pairs])
    if np.any(np.diff(big_n) != 1):
        raise ValueError("dyadic exponents must be consecutive")
    if big_n.size < MIN_SERIES_POINTS:
        raise ValueError(f"grid too sparse: {big_n.size} points")
    cums = np.cumsum(vals)
    # index the partial sums by N (shifted to start at 1 for the log fit)
    idx = big_n - big_n[0] + 1
    partial = [(int(i), float(c)) for i, c in zip(idx, cums)]
    decay = fit_decay(idx, vals)
    cls = classify_series(partial, decay, 0.0, tol, margin)
    return SeriesDiagnostic(label, 0.0, partial, decay, cls, tol, margin)


# -- analytic bounds ---------------------------------------------------------


@dataclass(frozen=True)
class KolmogorovCheck:
    K: int
    lhs: float
    bound: float
    checkpoints: list[tuple[int, float]]

    @property
    def holds(self) -> bool:
        return all(v <= self.bound for _, v in self.checkpoints)


def _indexed_truncated_second(spec, ks):
    """E[X_k^2 1{|X_k| <= k}] for an array of indices k."""
    ks = np.asarray(ks, dtype=np.float64)
    if isinstance(spec, ScaledFamily):
        c = spec.scale_at(ks)
        return c * c * truncated_second_moments(spec.base, ks / c)
    return truncated_second_moments(spec, ks)


def kolmogorov_weighted_bound(spec: DistributionSpec, K: int, chunk: int = 1 << 20) -> KolmogorovCheck:
    """sum_{k<=K} E[Y_k^2]/k^2 with Y_k = X_k 1{|X_k| <= k}, against 4 E|X_1|."""
    if K < 1:
        raise ValueError("K must be >= 1")
    m1 = moment_abs(spec, 1.0)
    if not math.isfinite(m1):
        raise ValueError(f"{spec.label} has infinite first moment")
    parts = []
    checkpoints = []
    marks = sorted(set([int(10**j) for j in range(int(math.log10(K)) + 1)] + [K]))
    mark_i = 0
    for k0 in range(1, K + 1, chunk):
        ks = np.arange(k0, min(K, k0 + chunk - 1) + 1, dtype=np.float64)
        terms = _indexed_truncated_second(spec, ks) / (ks * ks)
        while mark_i < len(marks) and marks[mark_i] <= ks[-1]:
            upto = marks[mark_i] - k0 + 1
            checkpoints.append((marks[mark_i], math.fsum(parts + [math.fsum(terms[:upto])])))
            mark_i += 1
        parts.append(math.fsum(terms))
    lhs = math.fsum(parts)
    return KolmogorovCheck(K, lhs, 4.0 * m1, checkpoints)


@dataclass(frozen=True)
class StoicaCurves:
    N: int
    n_marks: list[int]
    second_moment: list[float]
    first_moment: list[float]

    @staticmethod
    def _last_decade(marks, vals):
        top = vals[-1]
        if top == 0:
            return 0.0
        prev = _value_at_or_before(list(zip(marks, vals)), marks[-1] / 10)
        return (top - prev) / top

    @property
    def second_last_decade(self) -> float:
        """(S(N) - S(N/10)) / S(N) for the truncated-second-moment curve."""
        return self._last_decade(self.n_marks, self.second_moment)

    @property
    def first_last_decade(self) -> float:
        return self._last_decade(self.n_marks, self.first_moment)


def _stoica_inner(spec, n, c, which):
    """sum_{k<=n} E[...] at truncation level c."""
    if isinstance(spec, ScaledFamily):
        ks = np.arange(1, n + 1, dtype=np.float64)
        s = spec.scale_at(ks)
        if which == 2:
            return float(np.sum(s * s * truncated_second_moments(spec.base, c / s)))
        return float(np.sum(s * tail_first_moments(spec.base, c / s)))
    if which == 2:
        return n * truncated_second_moment(spec, c)
    return n * tail_first_moment(spec, c)


def stoica_bounds(spec: DistributionSpec, p: float, r: float, N: int) -> StoicaCurves:
    """Partial sums up to N of

        sum_n n^(p/r-2/r-2) sum_{k<=n} E[X_k^2 1{|X_k| <= n^(1/r)}]
        sum_n n^(p/r-1/r-2) sum_{k<=n} E[|X_k| 1{|X_k| >  n^(1/r)}]

    evaluated from closed-form expectations.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    ns = np.arange(1, N + 1, dtype=np.float64)
    cs = ns ** (1.0 / r)
    if isinstance(spec, ScaledFamily):
        inner2 = np.array([_stoica_inner(spec, int(n), c, 2) for n, c in zip(ns, cs)])
        inner1 = np.array([_stoica_inner(spec, int(n), c, 1) for n, c in zip(ns, cs)])
    else:
        inner2 = ns * truncated_second_moments(spec, cs)
        inner1 = ns * tail_first_moments(spec, cs)
    a = np.cumsum(ns ** (p / r - 2.0 / r - 2.0) * inner2)
    b = np.cumsum(ns ** (p / r - 1.0 / r - 2.0) * inner1)
    marks = sorted(set([int(10**j) for j in range(int(math.log10(N)) + 1)] + [N]))
    return StoicaCurves(N, marks, [float(a[m - 1]) for m in marks], [float(b[m - 1]) for m in marks])


# -- maximal inequality and Parseval -----------------------------------------


@dataclass(frozen=True)
class HuntYoungResult:
    integral: float
    rhs: float
    ratio: float
    endpoint_integral: float


def quadrature_nodes(M: int) -> np.ndarray:
    """t_j = -pi + 2 pi j / M, j = 0..M-1."""
    return -math.pi + 2.0 * math.pi * np.arange(M) / M


def parseval_check(xs, M: int | None = None) -> tuple[float, float]:
    """(rectangle-rule integral of |S_n(t)|^2 over M nodes using full scans, 2 pi sum x^2)."""
    xs = np.asarray(xs, dtype=np.float64)
    M = 2 * xs.size if M is None else M
    if M < 2 * xs.size:
        raise ValueError(f"need M >= 2n quadrature nodes, got M={M}, n={xs.size}")
    vals = []
    last = np.array([xs.size])
    for t in quadrature_nodes(M):
        s = dft_prefix_scan(xs, float(t), last).final_sum
        vals.append(s.real * s.real + s.imag * s.imag)
    return 2.0 * math.pi / M * math.fsum(vals), 2.0 * math.pi * math.fsum(xs * xs)


def hunt_young_ratio(xs, c: float, n: int, M: int) -> HuntYoungResult:
    """Quadrature of max_{k<=n} |S'_k(t)|^2 over [-pi, pi) against sum |x'_k|^2,
    where x' is x truncated to |x| <= c."""
    xs = np.asarray(xs, dtype=np.float64)
    if n < 1 or n > xs.size:
        raise ValueError("need 1 <= n <= len(xs)")
    if M < 2 * n:
        raise ValueError(f"need M >= 2n quadrature nodes, got M={M}, n={n}")
    low = split_at_threshold(xs[:n], c).low
    maxsq, endsq = kernels.grid_max_sq(np.ascontiguousarray(low), int(M))
    w = 2.0 * math.pi / M
    integral = w * math.fsum(maxsq)
    rhs = math.fsum(low * low)
    ratio = integral / rhs if rhs > 0 else math.nan
    return HuntYoungResult(integral, rhs, ratio, w * math.fsum(endsq))


# -- trajectories -------------------------------------------------------------


def kronecker_average(raw: PrefixScanResult) -> tuple[np.ndarray, np.ndarray]:
    """(k, |k^-1 sum_{j<=k} e^{ijt} y_j|) at the checkpoints of a raw scan of y."""
    k = raw.checkpoint_k
    mags = np.abs(raw.checkpoint_sums)
    return k, mags / k


def cauchy_increments(weighted: PrefixScanResult) -> tuple[np.ndarray, np.ndarray]:
    """(n, |T_m - T_n|) with m the next checkpoint, for the weighted partial sums T."""
    k = weighted.checkpoint_k
    sums = weighted.checkpoint_sums
    return k[:-1], np.abs(np.diff(sums))


@dataclass(frozen=True)
class CarlesonKronecker:
    t: float
    k: np.ndarray
    weighted: np.ndarray
    averaged: np.ndarray


def carleson_kronecker(ys, t: float, checkpoints) -> CarlesonKronecker:
    """Weighted series sum e^{ikt} y_k / k and the averages |n^-1 sum e^{ikt} y_k| on one grid."""
    w = weighted_fourier_series(ys, t, checkpoints)
    raw = dft_prefix_scan(ys, t, checkpoints)
    k, avg = kronecker_average(raw)
    return CarlesonKronecker(float(t), k, np.abs(w.checkpoint_sums), avg)


@dataclass(frozen=True)
class LLNTrajectory:
    t: float
    p: float
    n_grid: np.ndarray
    raw: np.ndarray  # |S_n(t)|, shape (seeds, grid)

    def normalized(self, power: float) -> np.ndarray:
        return self.raw / self.n_grid[None, :].astype(np.float64) ** power

    def summary(self, power: float, q=(0.1, 0.5, 0.9)) -> np.ndarray:
        """Quantiles over seeds per grid point, shape (len(q), grid)."""
        return np.quantile(self.normalized(power), q, axis=0)

    @property
    def median_over_n(self) -> np.ndarray:
        return np.median(self.normalized(1.0), axis=0)

    @property
    def median_over_root_p(self) -> np.ndarray:
        return np.median(self.normalized(1.0 / self.p), axis=0)


def lln_trajectory(spec: DistributionSpec, t: float, n_grid, seeds, p: float) -> LLNTrajectory:
    """|S_n(t)| at each grid n for each seed's path; normalize by n or n^(1/p) after."""
    n_grid = np.asarray(n_grid, dtype=np.int64)
    if n_grid.size == 0 or np.any(np.diff(n_grid) <= 0) or n_grid[0] < 1:
        raise ValueError("n_grid must be positive and strictly increasing")
    seeds = [int(s) for s in seeds]
    raw = np.empty((len(seeds), n_grid.size))
    n_max = int(n_grid[-1])
    for i, s in enumerate(seeds):
        scan = dft_prefix_scan(sample(spec, s, n_max), t, n_grid)
        raw[i] = np.abs(scan.checkpoint_sums)
    return LLNTrajectory(float(t), float(p), n_grid, raw)


def mismatch_counts(spec: DistributionSpec, n: int, seeds) -> np.ndarray:
    """#{k <= n : |x_k| > k} per seed, the number of entries truncation changes."""
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    out = np.zeros(seeds.size, dtype=np.int64)
    block = 1 << 16
    rows = max(1, (1 << 21) // block)
    for b0 in range(0, seeds.size, rows):
        sd = seeds[b0 : b0 + rows]
        for k0 in range(1, n + 1, block):
            cnt = min(block, n - k0 + 1)
            xs = draw_block(spec, sd, k0, cnt)
            ks = np.arange(k0, k0 + cnt, dtype=np.float64)
            out[b0 : b0 + sd.size] += np.count_nonzero(np.abs(xs) > ks[None, :], axis=1)
    return out
