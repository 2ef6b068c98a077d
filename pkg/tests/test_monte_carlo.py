import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dftlab.distributions import PairwiseRademacher, Rademacher, SymmetricPareto, sample
from dftlab.monte_carlo import (
    count_exceedances,
    estimate_exceedance,
    estimate_exceedance_curve,
    estimate_tail_prob,
    geometric_grid,
    wilson_interval,
    with_dense_head,
)
from dftlab.oracle import DiscreteLaw, exact_exceedance
from dftlab.rng import derive_seeds
from dftlab.sequence_engine import dft_prefix_scan

RAD = Rademacher()
P18 = SymmetricPareto(1.8)


class TestWilson:
    def test_against_closed_form(self):
        # textbook score interval at z = 2.5758293035489004 (two-sided 99%)
        z = 2.5758293035489004
        h, n = 37, 200
        ph = h / n
        c = (ph + z * z / (2 * n)) / (1 + z * z / n)
        w = z / (1 + z * z / n) * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n))
        lo, hi = wilson_interval(h, n)
        assert lo == pytest.approx(c - w, rel=1e-12) and hi == pytest.approx(c + w, rel=1e-12)

    def test_edges(self):
        assert wilson_interval(0, 100)[0] == 0.0
        assert wilson_interval(100, 100)[1] == 1.0

    @given(st.integers(1, 10**6), st.data())
    def test_contains_point_estimate(self, n, data):
        h = data.draw(st.integers(0, n))
        lo, hi = wilson_interval(h, n)
        assert 0 <= lo <= h / n <= hi <= 1


class TestEstimates:
    def test_rademacher_two_steps(self):
        est = estimate_tail_prob(RAD, 0.0, 2, 0.9, 1.0, 10_000, 1)
        assert est.threshold == pytest.approx(1.8)
        assert est.ci_low <= 0.5 <= est.ci_high

    def test_impossible_threshold(self):
        est = estimate_tail_prob(RAD, 0.3, 50, 100.0, 1.0, 1000, 2)
        assert est.hits == 0 and est.p_hat == 0.0

    def test_certain_event(self):
        est = estimate_exceedance(RAD, 0.0, 1, 0.5, 1000, 3)
        assert est.p_hat == 1.0

    def test_matches_per_path_scan(self):
        seeds = derive_seeds(17, 0, 300)
        n, t, thr = 700, 1.3, 40.0
        ref = sum(dft_prefix_scan(sample(P18, int(s), n), t).prefix_max > thr for s in seeds)
        assert count_exceedances(P18, t, n, thr, seeds) == ref

    def test_long_paths_cross_blocks(self):
        seeds = derive_seeds(5, 0, 40)
        n, t, thr = 10_000, 2.2, 150.0
        ref = sum(dft_prefix_scan(sample(P18, int(s), n), t).prefix_max > thr for s in seeds)
        assert count_exceedances(P18, t, n, thr, seeds) == ref

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            estimate_tail_prob(RAD, 0.0, 4, 1.0, 1.0, 99, 0)
        with pytest.raises(ValueError):
            estimate_tail_prob(RAD, 0.0, 4, 0.0, 1.0, 1000, 0)
        with pytest.raises(ValueError):
            estimate_tail_prob(RAD, 0.0, 4, 1.0, 2.0, 1000, 0)
        with pytest.raises(ValueError):
            estimate_tail_prob(RAD, 4.0, 4, 1.0, 1.0, 1000, 0)
        with pytest.raises(ValueError):
            estimate_exceedance(PairwiseRademacher(2), 0.0, 4, 1.0, 100, 0)

    def test_reproducible(self):
        a = estimate_tail_prob(P18, 0.4, 500, 1.0, 1.2, 2000, 99)
        b = estimate_tail_prob(P18, 0.4, 500, 1.0, 1.2, 2000, 99)
        assert a == b

    def test_monotone_in_epsilon(self):
        hits = [estimate_tail_prob(P18, 1.1, 1000, e, 1.2, 2000, 7).hits for e in (0.25, 0.5, 1.0, 2.0, 4.0)]
        assert hits == sorted(hits, reverse=True)

    def test_coverage_against_oracle(self):
        law = DiscreteLaw.rademacher()
        covered = total = 0
        for n in (3, 5, 7, 9):
            for t in (0.0, 0.8, 2.0, -1.4, 3.0):
                thr = 0.6 * math.sqrt(n) + 0.3
                exact = exact_exceedance(law, t, n, thr)
                est = estimate_exceedance(RAD, t, n, thr, 20_000, 1000 * n + int(10 * t))
                covered += est.ci_low <= exact <= est.ci_high
                total += 1
        assert covered >= math.ceil(0.95 * total)


class TestThreadIndependence:
    def test_hits_identical_across_thread_counts(self, py):
        code = (
            "from dftlab import set_threads\n"
            "from dftlab.distributions import SymmetricPareto\n"
            "from dftlab.monte_carlo import estimate_exceedance_curve\n"
            "import sys\n"
            "print(set_threads({n}), file=sys.stderr)\n"
            "c = estimate_exceedance_curve(SymmetricPareto(1.8), 0.9, [4, 64, 1024, 5000], 1.0, 1.2, 3000, 5)\n"
            "print([p.hits for p in c.points])\n"
        )
        one = py(code.format(n=1), threads=4)
        four = py(code.format(n=4), threads=4)
        assert one == four


class TestCurves:
    def test_grid(self):
        assert geometric_grid(4, 2, 3) == [4, 8, 16]
        c = estimate_exceedance_curve(RAD, 0.0, [4, 8, 16], 1.0, 1.0, 200, 1)
        assert list(c.n) == [4, 8, 16]

    def test_dense_head(self):
        g = with_dense_head([4, 8, 128, 256], 64)
        assert g[:64] == list(range(1, 65)) and g[-2:] == [128, 256]
        assert with_dense_head([2, 4, 8], 64) == list(range(1, 9))

    def test_curve_covers_oracle(self):
        law = DiscreteLaw.rademacher()
        grid = [2, 4, 6, 8, 10]
        c = estimate_exceedance_curve(RAD, 0.0, grid, 0.9, 1.0, 20_000, 3)
        misses = sum(
            not (pt.ci_low <= exact_exceedance(law, 0.0, pt.n, pt.threshold) <= pt.ci_high) for pt in c.points
        )
        assert misses <= 1

    def test_pareto_decreasing_in_n(self):
        c = estimate_exceedance_curve(P18, 1.2, [16, 256, 4096], 1.0, 1.5, 4000, 11)
        assert np.all(np.diff(c.p_hat) < 0)

    def test_disjoint_seed_ranges(self):
        c = estimate_exceedance_curve(P18, 1.2, [10, 20], 1.0, 1.2, 500, 11)
        direct = estimate_tail_prob(P18, 1.2, 20, 1.0, 1.2, 500, 11, index_offset=500)
        assert c.points[1] == direct
