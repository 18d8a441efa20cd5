"""Mixing curves, displacement moments, and scaling exponents."""

import math

import numpy as np
import pytest

from cantorjump import (
    Params,
    SplitStream,
    Word,
    kernel_row,
    level_one_residual,
    mixing_bound,
    mixing_report,
    moment_analytic,
    moment_curve,
    moment_empirical,
    moment_empirical_stats,
    moment_growth_rate,
    moment_limit,
    moment_truncation,
    scaling_expected_slope,
    scaling_exponent,
    scaling_regime,
    scaling_report,
    separation_index,
    tv_to_uniform,
)

P12 = Params(1.0, 2.0)


def brute_tv_to_uniform(n, t, params):
    """TV from the start row of the dense kernel, cell by cell."""
    row = kernel_row(Word(0, n), t, params)
    return 0.5 * math.fsum(abs(p - 2.0**-n) for p in row.tolist())


class TestTvToUniform:
    def test_time_zero(self):
        for n in range(1, 9):
            assert tv_to_uniform(n, 0.0, P12) == 1.0 - 2.0**-n

    def test_level_one_closed_form(self):
        # At resolution 1 the TV is exp(lambda_1 t) / 2 exactly.
        for t in (0.0, 0.1, 0.7, 3.0):
            expected = 0.5 * math.exp(-2.0 * P12.gamma * P12.theta * t)
            assert math.isclose(tv_to_uniform(1, t, P12), expected, rel_tol=1e-14)

    @pytest.mark.parametrize(
        "params", [Params(1.0, 0.5), Params(1.0, 1.0), Params(1.0, 2.0), Params(2.0, 3.5)]
    )
    def test_matches_brute_force(self, params):
        for n in (1, 2, 4, 6):
            for t in (0.0, 0.05, 0.3, 1.0, 5.0):
                fast = tv_to_uniform(n, t, params)
                brute = brute_tv_to_uniform(n, t, params)
                assert abs(fast - brute) <= 1e-13

    def test_start_independent(self):
        # Every row has the same deviation profile, so the brute TV must not
        # depend on the starting cell.
        n, t = 5, 0.2
        rows = [kernel_row(Word(p, n), t, P12) for p in (0, 7, 31)]
        tvs = [0.5 * math.fsum(abs(x - 2.0**-n) for x in r.tolist()) for r in rows]
        assert max(tvs) - min(tvs) <= 1e-15

    def test_monotone_in_resolution_and_time(self):
        ts = [0.05 * i for i in range(1, 40)]
        for t in ts:
            tvs = [tv_to_uniform(n, t, P12) for n in range(1, 9)]
            assert all(b >= a - 1e-15 for a, b in zip(tvs, tvs[1:]))
        for n in (1, 4, 8):
            vals = [tv_to_uniform(n, t, P12) for t in ts]
            assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            tv_to_uniform(0, 0.1, P12)
        with pytest.raises(ValueError):
            tv_to_uniform(2, -0.1, P12)


class TestMixingReport:
    def test_bound_holds_everywhere(self):
        grid = np.linspace(0.0, 10.0 / (P12.gamma * P12.theta), 50)
        report = mixing_report(P12, n_max=10, t_grid=grid)
        assert report.passed
        assert report.violations == ()
        assert len(report.curves) == 10
        assert all(len(c.points) == 50 for c in report.curves)

    def test_bound_holds_for_slow_parameters(self):
        params = Params(0.7, 0.5)
        grid = np.linspace(0.0, 10.0 / (params.gamma * params.theta), 50)
        assert mixing_report(params, n_max=8, t_grid=grid).passed

    def test_bound_value(self):
        assert mixing_bound(0.0, P12) == 1.5
        assert math.isclose(mixing_bound(1.0, P12), 1.5 * math.exp(-2.0), rel_tol=1e-15)

    def test_level_one_residual_is_tight(self):
        # The leftover on the starting cell equals the no-jump bound exactly;
        # the flipped cell carries none of it.
        for t in (0.0, 0.05, 0.4, 2.0):
            beta, bound = level_one_residual(t, P12)
            assert math.isclose(bound, math.exp(-P12.gamma * P12.theta * t), rel_tol=1e-15)
            assert abs(beta - bound) <= 1e-12
            assert 0.0 <= beta <= bound + 1e-12

    def test_residuals_recorded(self):
        report = mixing_report(P12, n_max=2, t_grid=[0.1, 0.2])
        assert len(report.residuals) == 2
        for t, beta, bound in report.residuals:
            assert 0.0 <= beta <= bound + 1e-12
        assert report.bound(0.1) == mixing_bound(0.1, P12)

    def test_validation(self):
        with pytest.raises(ValueError):
            mixing_report(P12, n_max=0, t_grid=[0.1])
        with pytest.raises(ValueError):
            mixing_report(P12, n_max=11, t_grid=[0.1])
        with pytest.raises(ValueError):
            mixing_report(P12, n_max=2, t_grid=[])
        with pytest.raises(ValueError):
            mixing_report(P12, n_max=2, t_grid=[-0.1])


class TestMomentTruncation:
    def test_minimal_cutoff(self):
        K, tail = moment_truncation(1.0, 1e-12)
        q = 1.0 / 3.0
        assert tail < 1e-12
        assert q**K / (1.0 - q) >= 1e-12  # K - 1 would not certify
        assert tail == q ** (K + 1) / (1.0 - q)

    def test_small_order_needs_more_terms(self):
        K_half, _ = moment_truncation(0.5)
        K_two, _ = moment_truncation(2.0)
        assert K_half > K_two

    def test_validation(self):
        with pytest.raises(ValueError):
            moment_truncation(0.0)
        with pytest.raises(ValueError):
            moment_truncation(1.0, tol=0.0)
        with pytest.raises(ValueError):
            moment_truncation(1e-7)  # needs more terms than the cap allows


class TestMomentAnalytic:
    def test_zero_at_time_zero(self):
        assert moment_analytic(1.0, 0.0, P12) == 0.0
        assert moment_analytic(0.5, 0.0, Params(2.0, 3.5)) == 0.0

    def test_limit_value(self):
        assert math.isclose(moment_limit(1.0), 0.2, rel_tol=1e-15)
        x = 3.0**-2 / 2
        assert math.isclose(moment_limit(2.0), x / (1 - x), rel_tol=1e-15)

    def test_converges_to_limit(self):
        for r in (0.5, 1.0, 2.0):
            m = moment_analytic(r, 80.0, P12)
            assert math.isclose(m, moment_limit(r), rel_tol=1e-10)

    def test_strictly_increasing_in_time(self):
        ts = np.linspace(0.0, 3.0, 40)
        vals = [moment_analytic(1.0, float(t), P12) for t in ts]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert all(v <= moment_limit(1.0) + 1e-12 for v in vals)

    @pytest.mark.parametrize("params", [Params(1.0, 0.5), Params(1.0, 2.0), Params(1.0, 4.0)])
    def test_matches_kernel_row_class_sums(self, params):
        # Independent check: sum 3^(-rk) against the class masses read off a
        # dense kernel row.  The row only resolves classes up to n, which
        # leaves at most the invariant mass beyond n, 3^(-r(n+1))/(1-3^-r).
        r, t, n = 1.0, 0.3, 10
        row = kernel_row(Word(0, n), t, params)
        x0 = Word(0, n)
        class_mass = [0.0] * (n + 1)
        for pattern, p in enumerate(row.tolist()):
            c = separation_index(x0, Word(pattern, n))
            if pattern:
                class_mass[c] += p
        row_sum = math.fsum(3.0 ** (-r * k) * class_mass[k] for k in range(1, n + 1))
        analytic = moment_analytic(r, t, params)
        slack = 3.0 ** (-r * (n + 1)) / (1.0 - 3.0**-r) + 1e-12
        assert abs(analytic - row_sum) <= slack

    def test_tail_certificate_respected(self):
        # Tightening the tolerance must not move the value by more than the
        # certified tail bound of the looser run.
        r, t = 1.0, 0.5
        loose = moment_analytic(r, t, P12, tol=1e-6)
        tight = moment_analytic(r, t, P12, tol=1e-14)
        _, tail = moment_truncation(r, 1e-6)
        assert abs(loose - tight) <= tail

    def test_validation(self):
        with pytest.raises(ValueError):
            moment_analytic(0.0, 0.1, P12)
        with pytest.raises(ValueError):
            moment_analytic(1.0, -0.1, P12)


class TestMomentGrowthRate:
    def test_closed_form(self):
        # gamma * x / (1 - x) with x = theta / 3^r: at theta=2, r=1 this is 2.
        assert moment_growth_rate(1.0, P12) == pytest.approx(2.0, rel=1e-15)
        assert moment_growth_rate(2.0, Params(3.0, 1.0)) == pytest.approx(
            3.0 * (1 / 9) / (1 - 1 / 9), rel=1e-15
        )

    def test_diverges_at_and_above_critical(self):
        with pytest.raises(ValueError):
            moment_growth_rate(1.0, Params(1.0, 3.0))
        with pytest.raises(ValueError):
            moment_growth_rate(1.0, Params(1.0, 4.0))

    @pytest.mark.parametrize("theta", [0.5, 1.0, 1.5])
    def test_derivative_law_at_standard_step(self, theta):
        # (M_r(h) - 0) / h approaches the growth rate; the finite-h error is
        # O(h^(ln(3/theta)/ln theta)) so a 1e-6 step certifies 1e-3 here.
        params = Params(1.0, theta)
        h = 1e-6
        fd = moment_analytic(1.0, h, params) / h
        exact = moment_growth_rate(1.0, params)
        assert abs(fd - exact) / exact <= 1e-3

    def test_derivative_law_near_critical_needs_smaller_step(self):
        # At theta=2 the error exponent ln(3/2)/ln2 = 0.585 makes h=1e-6 too
        # coarse for 1e-3; h=1e-8 restores it with room to spare.
        fd = moment_analytic(1.0, 1e-8, P12) / 1e-8
        assert abs(fd - 2.0) / 2.0 <= 1e-3


class TestMomentEmpirical:
    def test_matches_analytic_within_errorbars(self):
        r, t, depth, samples = 1.0, 0.1, 20, 100_000
        rng = SplitStream.from_seed(42)
        mean, se = moment_empirical_stats(r, t, depth, samples, P12, rng)
        analytic = moment_analytic(r, t, P12)
        bias = 3.0 ** (-r * depth) / (1.0 - 3.0**-r)
        assert abs(mean - analytic) <= 3.0 * se + bias
        assert se < analytic  # the estimate resolves the signal

    def test_mean_matches_stats(self):
        rng_a = SplitStream.from_seed(11)
        rng_b = SplitStream.from_seed(11)
        mean = moment_empirical(1.0, 0.2, 10, 500, P12, rng_a)
        stats = moment_empirical_stats(1.0, 0.2, 10, 500, P12, rng_b)
        assert mean == stats[0]

    def test_deterministic(self):
        a = moment_empirical(1.0, 0.2, 10, 500, P12, SplitStream.from_seed(3))
        b = moment_empirical(1.0, 0.2, 10, 500, P12, SplitStream.from_seed(3))
        assert a == b

    def test_zero_time(self):
        assert moment_empirical(1.0, 0.0, 10, 100, P12, SplitStream.from_seed(1)) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            moment_empirical(0.0, 0.1, 10, 10, P12, SplitStream.from_seed(0))


class TestMomentCurve:
    def test_curve_carries_certificate(self):
        curve = moment_curve(1.0, [0.0, 0.1, 1.0], P12)
        assert curve.r == 1.0
        assert len(curve.points) == 3
        assert curve.points[0] == (0.0, 0.0)
        K, tail = moment_truncation(1.0)
        assert curve.truncation == K and curve.tail_bound == tail

    def test_validation(self):
        with pytest.raises(ValueError):
            moment_curve(1.0, [], P12)


class TestScaling:
    def test_expected_slopes_and_regimes(self):
        assert scaling_expected_slope(1.0, P12) == 1.0
        assert scaling_regime(1.0, P12) == "linear"
        th4 = Params(1.0, 4.0)
        assert math.isclose(
            scaling_expected_slope(1.0, th4), math.log(3) / math.log(4), rel_tol=1e-15
        )
        assert scaling_regime(1.0, th4) == "fractional"

    def test_linear_regime_slope(self):
        slope = scaling_exponent(1.0, P12, 1e-5, 1e-3, 50)
        assert abs(slope - 1.0) <= 0.05

    def test_fractional_regime_slope_exact_half(self):
        slope = scaling_exponent(1.0, Params(1.0, 9.0), 1e-5, 1e-3, 50)
        assert abs(slope - 0.5) <= 0.05

    def test_fractional_regime_slope_log_irrational(self):
        slope = scaling_exponent(1.0, Params(1.0, 4.0), 1e-5, 1e-3, 50)
        assert abs(slope - math.log(3) / math.log(4)) <= 0.05

    def test_report_shape(self):
        rep = scaling_report(1.0, Params(1.0, 9.0), 1e-5, 1e-3, 20)
        assert set(rep) == {"r", "gamma", "theta", "slope", "expected", "regime"}
        assert rep["regime"] == "fractional" and rep["expected"] == 0.5

    def test_refuses_critical_surface(self):
        with pytest.raises(ValueError):
            scaling_exponent(1.0, Params(1.0, 3.0), 1e-5, 1e-3, 10)
        with pytest.raises(ValueError):
            scaling_exponent(1.0, Params(1.0, 3.0 + 1e-10), 1e-5, 1e-3, 10)

    def test_refuses_degenerate_and_bad_grids(self):
        with pytest.raises(ValueError):
            scaling_exponent(1.0, Params(0.0, 2.0), 1e-5, 1e-3, 10)
        with pytest.raises(ValueError):
            scaling_exponent(1.0, P12, 1e-3, 1e-5, 10)
        with pytest.raises(ValueError):
            scaling_exponent(1.0, P12, 0.0, 1e-3, 10)
        with pytest.raises(ValueError):
            scaling_exponent(1.0, P12, 1e-5, 1e-3, 1)
        with pytest.raises(ValueError):
            scaling_expected_slope(1.0, Params(0.0, 1.0))
