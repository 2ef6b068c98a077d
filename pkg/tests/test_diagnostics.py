import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dftlab.diagnostics import (
    Classification,
    baum_katz_series,
    carleson_kronecker,
    classify_series,
    dyadic_series,
    fit_decay,
    hunt_young_ratio,
    kolmogorov_weighted_bound,
    kronecker_average,
    lln_trajectory,
    mismatch_counts,
    parseval_check,
    stoica_bounds,
    weighted_series,
)
from dftlab.distributions import PointMass, Rademacher, ScaledFamily, SymmetricPareto, sample
from dftlab.monte_carlo import ExceedanceCurve, TailProbEstimate
from dftlab.rng import derive_seeds
from dftlab.sequence_engine import dft_prefix_scan, truncate_at_index

C = Classification
P18 = SymmetricPareto(1.8)
P12 = SymmetricPareto(1.2)


def synthetic_curve(ns, ps, r=1.0):
    pts = [TailProbEstimate(int(n), 0.5, 1.0, 0, 1000, float(p), 0.0, 1.0) for n, p in zip(ns, ps)]
    return ExceedanceCurve(P18, 1.5, r, 1.0, 0.5, pts)


def power_grid(top=10**6):
    return sorted(set(range(1, 65)) | {int(round(x)) for x in np.geomspace(64, top, 40)})


class TestSeries:
    def test_zeta_two_point_five(self):
        ns = power_grid()
        d = baum_katz_series(synthetic_curve(ns, [n**-2.0 for n in ns]), 1.5, 1.0)
        assert d.weights_exponent == pytest.approx(-0.5)
        zeta = float(mpmath.zeta(2.5))
        direct = math.fsum(k**-2.5 for k in range(1, 10**6 + 1))
        assert d.total == pytest.approx(direct, rel=1e-6)
        assert d.total == pytest.approx(zeta, rel=1e-8)
        assert d.classification == C.CONVERGENT

    def test_zero_curve(self):
        ns = power_grid(10**4)
        d = baum_katz_series(synthetic_curve(ns, [0.0] * len(ns)), 1.5, 1.2)
        assert d.total == 0 and d.classification == C.CONVERGENT

    def test_harmonic(self):
        ns = power_grid()
        d = baum_katz_series(synthetic_curve(ns, [1.0] * len(ns), r=1.5), 1.5, 1.5)
        for n, v in d.partial_sums[64:]:
            assert v == pytest.approx(math.log(n) + np.euler_gamma + 1 / (2 * n), rel=1e-2)
        assert d.classification == C.DIVERGENT

    def test_dead_band(self):
        ns = np.array(power_grid())
        d = weighted_series(ns, ns**-1.05, 0.0)
        assert d.classification == C.INDETERMINATE

    def test_interpolation_is_exact_for_power_laws(self):
        ns = np.array(power_grid(10**5))
        d = weighted_series(ns, ns**-1.7, 0.0)
        assert d.total == pytest.approx(math.fsum(k**-1.7 for k in range(1, 10**5 + 1)), rel=1e-12)

    @settings(max_examples=30)
    @given(st.floats(0.5, 3.0), st.floats(1e-6, 1e6))
    def test_scale_equivariance(self, a, scale):
        ns = np.array(power_grid(10**5))
        d1 = weighted_series(ns, ns**-a, 0.0)
        d2 = weighted_series(ns, scale * ns**-a, 0.0)
        assert d1.classification == d2.classification
        assert d2.total == pytest.approx(scale * d1.total, rel=1e-9)

    def test_partial_sums_nondecreasing(self):
        ns = np.array(power_grid(10**4))
        d = weighted_series(ns, np.abs(np.sin(ns)) / ns, 0.2)
        vals = [v for _, v in d.partial_sums]
        assert vals == sorted(vals)

    def test_sparse_grid(self):
        with pytest.raises(ValueError):
            weighted_series([1, 2, 3], [1, 1, 1], 0.0)

    def test_fit_decay(self):
        ns = np.array(power_grid())
        assert fit_decay(ns, 3.0 * ns**-1.3) == pytest.approx(-1.3, abs=1e-10)
        assert fit_decay(ns, np.zeros(ns.size)) == -math.inf


class TestClassifier:
    def test_rules(self):
        conv = [(2**j, 1.0 - 2.0**-j) for j in range(1, 20)]
        assert classify_series(conv, -2.0, 0.0) == C.CONVERGENT
        grow = [(2**j, float(j)) for j in range(1, 20)]
        assert classify_series(grow, -1.0, 0.0) == C.DIVERGENT
        assert classify_series(conv, -1.05, 0.0) == C.INDETERMINATE

    def test_needs_four_points(self):
        with pytest.raises(ValueError):
            classify_series([(1, 1.0), (2, 2.0), (4, 3.0)], -2.0, 0.0)


class TestDyadic:
    def test_geometric(self):
        d = dyadic_series([(2**N, 2.0**-N) for N in range(0, 40)], 1.5)
        assert d.total == pytest.approx(2.0, rel=1e-10)
        d = dyadic_series([(2**N, 2.0**-N) for N in range(1, 40)], 1.5)
        assert d.total == pytest.approx(1.0, rel=1e-10)
        assert d.classification == C.CONVERGENT

    def test_zero_and_constant(self):
        assert dyadic_series([(2**N, 0.0) for N in range(12)], 1.5).classification == C.CONVERGENT
        assert dyadic_series([(2**N, 0.3) for N in range(12)], 1.5).classification == C.DIVERGENT

    def test_rejects_non_dyadic(self):
        with pytest.raises(ValueError):
            dyadic_series([(1, 0.1), (2, 0.1), (3, 0.1), (4, 0.1)], 1.5)


class TestKolmogorov:
    def test_pareto_against_direct_sum(self):
        K = 10**5
        chk = kolmogorov_weighted_bound(P18, K)
        direct = math.fsum(9.0 * (k**0.2 - 1.0) / (k * k) for k in range(1, K + 1))
        assert chk.lhs == pytest.approx(direct, rel=1e-12)
        assert chk.bound == pytest.approx(9.0)
        vals = [v for _, v in chk.checkpoints]
        assert vals == sorted(vals) and chk.holds

    def test_rademacher_basel(self):
        chk = kolmogorov_weighted_bound(Rademacher(), 10**6)
        assert chk.lhs == pytest.approx(math.pi**2 / 6 - 1.0 / 10**6, abs=1e-9)
        assert chk.bound == 4.0

    def test_k_one(self):
        assert kolmogorov_weighted_bound(P18, 1).lhs == 0.0

    def test_chunking_invariant(self):
        a = kolmogorov_weighted_bound(P18, 10**5, chunk=997).lhs
        b = kolmogorov_weighted_bound(P18, 10**5).lhs
        assert a == pytest.approx(b, rel=1e-14)

    def test_infinite_mean(self):
        with pytest.raises(ValueError):
            kolmogorov_weighted_bound(SymmetricPareto(0.9), 10)

    def test_scaled_family_within_bound(self):
        assert kolmogorov_weighted_bound(ScaledFamily(P18), 10**5).holds


class TestStoica:
    def test_matches_direct_double_sum(self):
        N, p, r, a = 2000, 1.5, 1.2, 1.8
        s2 = s1 = 0.0
        for n in range(1, N + 1):
            c = n ** (1 / r)
            e2 = a * (c ** (2 - a) - 1) / (2 - a)
            e1 = a / (a - 1) * c ** (1 - a)
            s2 += n ** (p / r - 2 / r - 2) * n * e2
            s1 += n ** (p / r - 1 / r - 2) * n * e1
        sb = stoica_bounds(P18, p, r, N)
        assert sb.second_moment[-1] == pytest.approx(s2, rel=1e-10)
        assert sb.first_moment[-1] == pytest.approx(s1, rel=1e-10)

    def test_rademacher_second_is_flat(self):
        sb = stoica_bounds(Rademacher(), 1.5, 1.2, 10**4)
        # c = n^(1/r) >= 1 for every n, so every term is n^(...) * n * 1 and the
        # first-moment curve is identically zero
        assert all(v == 0 for v in sb.first_moment)

    def test_nondecreasing(self):
        sb = stoica_bounds(P12, 1.5, 1.2, 10**4)
        assert sb.second_moment == sorted(sb.second_moment)
        assert sb.first_moment == sorted(sb.first_moment)

    def test_contrast_grows(self):
        assert stoica_bounds(P12, 1.5, 1.2, 10**5).first_last_decade > 0.1


class TestHuntYoung:
    def test_two_ones(self):
        res = hunt_young_ratio(np.ones(2), 10.0, 2, 4)
        quad, _ = parseval_check(np.ones(2), 4)
        assert quad == pytest.approx(4 * math.pi, rel=1e-14)
        assert res.endpoint_integral == pytest.approx(4 * math.pi, rel=1e-14)
        assert res.integral >= 4 * math.pi * (1 - 1e-12)

    def test_single_term(self):
        xs = np.zeros(16)
        xs[0] = -3.0
        res = hunt_young_ratio(xs, 10.0, 16, 32)
        assert res.integral == pytest.approx(2 * math.pi * 9, rel=1e-14)
        assert res.ratio == pytest.approx(2 * math.pi, rel=1e-14)

    def test_against_per_node_scans(self):
        xs = sample(P18, 3, 64)
        c = 64 ** (1 / 1.2)
        res = hunt_young_ratio(xs, c, 64, 128)
        low = np.where(np.abs(xs) <= c, xs, 0.0)
        ts = -math.pi + 2 * math.pi * np.arange(128) / 128
        ref = 2 * math.pi / 128 * math.fsum(dft_prefix_scan(low, float(t)).prefix_max ** 2 for t in ts)
        assert res.integral == pytest.approx(ref, rel=1e-12)

    @settings(max_examples=25)
    @given(st.integers(0, 2**32), st.integers(2, 300))
    def test_ratio_at_least_two_pi(self, seed, n):
        res = hunt_young_ratio(sample(P18, seed, n), n ** (1 / 1.2), n, 2 * n)
        assume(res.rhs > 0)  # everything truncated away leaves the ratio undefined (nan)
        assert res.endpoint_integral == pytest.approx(2 * math.pi * res.rhs, rel=1e-9)
        assert res.ratio >= 2 * math.pi - 1e-6

    def test_too_few_nodes(self):
        with pytest.raises(ValueError):
            hunt_young_ratio(np.ones(8), 2.0, 8, 15)


class TestTrajectories:
    def test_kronecker_zero(self):
        _, avg = kronecker_average(dft_prefix_scan(np.zeros(100), 0.3))
        assert np.all(avg == 0)

    def test_kronecker_alternating(self):
        n = 1000
        ys = (-1.0) ** np.arange(1, n + 1)
        k, avg = kronecker_average(dft_prefix_scan(ys, 0.0, np.arange(1, n + 1)))
        assert np.all(avg <= 1.0 / k + 1e-15)

    def test_kronecker_decreases_for_truncated_pareto(self):
        ck = [10**3, 10**4, 10**5]
        rows = []
        for s in derive_seeds(4, 0, 20):
            ys, _ = truncate_at_index(sample(P18, int(s), 10**5))
            rows.append(carleson_kronecker(ys, 1.7, ck).averaged)
        med = np.median(np.array(rows), axis=0)
        assert med[-1] < med[0]

    def test_lln_point_mass_zero(self):
        tr = lln_trajectory(PointMass(0.0), 0.5, [10, 100], derive_seeds(1, 0, 5), 1.5)
        assert np.all(tr.raw == 0)

    def test_lln_rademacher_clt_scale(self):
        tr = lln_trajectory(Rademacher(), 0.0, [100, 10_000], derive_seeds(2, 0, 400), 1.5)
        m = tr.median_over_n
        assert m[1] < m[0] / 10

    def test_lln_matches_scan(self):
        seeds = derive_seeds(3, 0, 3)
        tr = lln_trajectory(P18, 2.0, [7, 70, 700], seeds, 1.5)
        for i, s in enumerate(seeds):
            xs = sample(P18, int(s), 700)
            assert tr.raw[i, 1] == pytest.approx(abs(dft_prefix_scan(xs[:70], 2.0, [70]).final_sum), rel=1e-12)


class TestMismatch:
    def test_counts_match_truncation(self):
        seeds = derive_seeds(6, 0, 5)
        counts = mismatch_counts(P18, 70_000, seeds)
        for c, s in zip(counts, seeds):
            assert c == truncate_at_index(sample(P18, int(s), 70_000))[1]

    def test_expected_value_helper(self):
        from dftlab.runner import expected_mismatch

        n = 10**4
        assert expected_mismatch(P18, n) == pytest.approx(math.fsum(k**-1.8 for k in range(1, n + 1)), rel=1e-13)
        assert expected_mismatch(Rademacher(), n) == 0.0
