"""Special functions, quadrature and maximisation."""

import math

import numpy as np
import pytest

from riskcurves import (
    BetaRisk,
    LogValue,
    RealisablePerceptron,
    UnrealisablePerceptron,
    digamma,
    integrate,
    integrate_log,
    log_beta,
    maximize_unimodal,
    normal_cdf,
    normal_quantile,
    reg_inc_beta,
)

EULER_GAMMA = 0.5772156649015329


class TestLogBeta:
    def test_analytic_values(self):
        assert log_beta(1, 1) == pytest.approx(0.0, abs=1e-14)
        assert log_beta(0.5, 0.5) == pytest.approx(math.log(math.pi), rel=1e-13)
        assert log_beta(3, 4) == pytest.approx(math.log(1 / 60), rel=1e-13)

    def test_symmetry_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a, b = rng.uniform(0.1, 50, size=2)
            assert log_beta(a, b) == log_beta(b, a)

    def test_huge_arguments(self):
        # ln B(a, b) = lnG(a) + lnG(b) - lnG(a+b) straight from log-gamma
        from scipy.special import gammaln

        a, b = 1e8, 3e7
        expect = gammaln(a) + gammaln(b) - gammaln(a + b)
        assert log_beta(a, b) == pytest.approx(expect, rel=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            log_beta(0.0, 1.0)
        with pytest.raises(ValueError):
            log_beta(1.0, -2.0)


class TestDigamma:
    def test_analytic_values(self):
        assert digamma(1.0) == pytest.approx(-EULER_GAMMA, abs=1e-12)
        assert digamma(2.0) == pytest.approx(1.0 - EULER_GAMMA, abs=1e-12)
        assert digamma(0.5) == pytest.approx(-EULER_GAMMA - 2 * math.log(2), abs=1e-12)

    def test_recurrence(self):
        xs = np.geomspace(0.01, 100, 200)
        lhs = digamma(xs + 1.0)
        rhs = digamma(xs) + 1.0 / xs
        assert np.max(np.abs(lhs - rhs)) < 1e-12 * np.max(np.abs(rhs))

    def test_domain(self):
        with pytest.raises(ValueError):
            digamma(0.0)


class TestRegIncBeta:
    def test_edge_values(self):
        assert reg_inc_beta(0.0, 2.0, 3.0) == 0.0
        assert reg_inc_beta(1.0, 2.0, 3.0) == 1.0
        assert reg_inc_beta(0.5, 4.0, 4.0) == pytest.approx(0.5, abs=1e-14)
        assert reg_inc_beta(0.37, 1.0, 1.0) == pytest.approx(0.37, abs=1e-14)

    def test_reflection_identity(self):
        rng = np.random.default_rng(11)
        t = rng.uniform(0, 1, size=100)
        a = rng.uniform(0.2, 20, size=100)
        b = rng.uniform(0.2, 20, size=100)
        total = reg_inc_beta(t, a, b) + reg_inc_beta(1 - t, b, a)
        assert np.max(np.abs(total - 1.0)) < 1e-12

    def test_monotone_in_t(self):
        t = np.linspace(0, 1, 101)
        vals = reg_inc_beta(t, 3.0, 5.0)
        assert np.all(np.diff(vals) >= 0)

    def test_domain(self):
        with pytest.raises(ValueError):
            reg_inc_beta(-0.1, 1, 1)
        with pytest.raises(ValueError):
            reg_inc_beta(1.1, 1, 1)


class TestNormal:
    def test_cdf_values(self):
        assert normal_cdf(0.0) == 0.5
        # quartile and the 0.1% point of the standard normal
        assert normal_cdf(-0.6745) == pytest.approx(0.25, abs=5e-5)
        assert normal_cdf(-3.090) == pytest.approx(0.001, rel=5e-3)

    def test_roundtrip(self):
        u = np.concatenate((np.geomspace(1e-12, 0.5, 40), 1 - np.geomspace(1e-12, 0.5, 40)))
        assert np.max(np.abs(normal_cdf(normal_quantile(u)) - u)) < 1e-12

    def test_quantile_domain(self):
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                normal_quantile(bad)


class TestLogValue:
    def test_roundtrip_and_addition(self):
        x = LogValue.from_value(3.0)
        y = LogValue.from_value(4.0)
        assert (x + y).value == pytest.approx(7.0, rel=1e-14)
        assert (x * y).value == pytest.approx(12.0, rel=1e-14)
        assert (y / x).value == pytest.approx(4.0 / 3.0, rel=1e-14)

    def test_far_below_underflow(self):
        # ln B(a, b + m) for m = 1e6 is ~ -1.2e4: far below float underflow
        tiny = LogValue(log_beta(100.0, 100.0 / 9.0 + 10**6))
        assert tiny.log < -700
        assert (tiny + tiny).log == pytest.approx(tiny.log + math.log(2), rel=1e-12)

    def test_addition_never_overflows(self):
        big = LogValue(1e8)
        assert (big + big).log == pytest.approx(1e8 + math.log(2), rel=1e-12)

    def test_zero(self):
        zero = LogValue.from_value(0.0)
        assert zero.log == -math.inf
        assert (zero + LogValue.from_value(2.0)).value == pytest.approx(2.0)


class TestIntegrate:
    def test_constant(self):
        res = integrate(lambda x: np.ones_like(x), 0.0, 1.0)
        assert res.converged
        assert res.value == pytest.approx(1.0, rel=1e-12)

    def test_beta_density_normalization(self):
        d = BetaRisk(5, 5)
        res = integrate(d.density, 0.0, 1.0)
        assert res.converged
        assert res.value == pytest.approx(1.0, rel=1e-10)

    def test_endpoint_singularity(self):
        with np.errstate(divide="ignore"):
            res = integrate(lambda x: x**-0.5 * (1 - x) ** -0.5, 0.0, 1.0, rtol=1e-8)
        assert res.converged
        assert res.value == pytest.approx(math.pi, rel=2e-8)

    def test_budget_exhaustion_is_flagged(self):
        rng_f = lambda x: np.cos(1e4 * x)  # noqa: E731
        res = integrate(rng_f, 0.0, 1.0, rtol=1e-14, budget=500)
        assert not res.converged
        assert res.evaluations <= 500

    def test_error_estimate_nonnegative_and_budget(self):
        res = integrate(lambda x: np.sin(x), 0.0, 3.0)
        assert res.error_estimate >= 0
        assert res.evaluations <= 10**6

    def test_domain(self):
        with pytest.raises(ValueError):
            integrate(lambda x: x, 1.0, 0.0)

    def test_all_density_normalizations(self):
        dists = [
            BetaRisk(2, 2),
            BetaRisk(0.5, 0.5),
            BetaRisk(100, 100 / 9),
            RealisablePerceptron(10),
            RealisablePerceptron(100),
            UnrealisablePerceptron(10, 0.6745),
            UnrealisablePerceptron(100, 3.090),
        ]
        for d in dists:
            lo, hi = d.support()
            res = integrate(d.density, lo, hi, rtol=1e-9)
            assert abs(res.value - 1.0) < 1e-8, d


class TestIntegrateLog:
    def test_agrees_with_linear_where_linear_works(self):
        for d in [BetaRisk(5, 5), BetaRisk(100, 100 / 9), RealisablePerceptron(20)]:
            lin = integrate(d.density, 0.0, 1.0).value
            lg = math.exp(integrate_log(d.log_density, 0.0, 1.0, locate_peak=True).log)
            assert lg == pytest.approx(lin, rel=1e-9)

    def test_underflow_regime(self):
        # int r^(a-1) (1-r)^(b+m-1) dr = B(a, b+m), far below underflow
        a, b, m = 100.0, 100.0 / 9.0, 10**6

        def g(r):
            with np.errstate(divide="ignore"):
                return (a - 1) * np.log(r) + (b + m - 1) * np.log1p(-r)

        res = integrate_log(g, 0.0, 1.0, locate_peak=True)
        assert res.converged
        assert res.log == pytest.approx(log_beta(a, b + m), rel=1e-11, abs=1e-8)

    def test_zero_integrand(self):
        res = integrate_log(lambda x: np.full_like(x, -np.inf), 0.0, 1.0)
        assert res.converged
        assert res.log == -math.inf

    def test_gaussian_bump(self):
        res = integrate_log(lambda x: -0.5 * (x - 0.3) ** 2 * 1e6, 0.0, 1.0, locate_peak=True)
        assert res.converged
        assert res.log == pytest.approx(math.log(math.sqrt(2 * math.pi / 1e6)), rel=1e-10)


class TestMaximizeUnimodal:
    def test_parabola(self):
        x, fx = maximize_unimodal(lambda x: -((x - 0.3) ** 2), 0.0, 1.0, tol=1e-10)
        assert x == pytest.approx(0.3, abs=1e-9)
        assert fx == pytest.approx(0.0, abs=1e-15)

    def test_symmetric_log_sine(self):
        # localisation at a quadratic top is limited to ~sqrt(eps)
        x, _ = maximize_unimodal(lambda x: math.log(math.sin(math.pi * x)), 0.01, 0.99, 1e-10)
        assert x == pytest.approx(0.5, abs=3e-8)

    def test_tilted_log_sine_matches_grid_scan(self):
        f = lambda x: math.log(math.sin(math.pi * x)) + 10 * math.log(1 - x)  # noqa: E731
        grid = np.linspace(1e-6, 1 - 1e-6, 2_000_001)
        with np.errstate(divide="ignore"):
            vals = np.log(np.sin(np.pi * grid)) + 10 * np.log1p(-grid)
        oracle = grid[np.argmax(vals)]
        x, _ = maximize_unimodal(f, 1e-6, 1 - 1e-6, tol=1e-10)
        assert x < 0.5
        assert x == pytest.approx(oracle, abs=1e-6)

    def test_boundary_maximum(self):
        x, _ = maximize_unimodal(lambda x: x, 0.0, 1.0, tol=1e-12)
        assert x == pytest.approx(1.0, abs=1e-10)

    def test_domain(self):
        with pytest.raises(ValueError):
            maximize_unimodal(lambda x: x, 1.0, 0.0, 1e-8)
