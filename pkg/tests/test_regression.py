"""Gamma-precision regression model."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import beta as beta_dist

from riskcurves import (
    GammaPrecisionModel,
    erm_loss_density,
    expected_erm_risk_regression,
    integrate,
    loss_cdf,
    loss_density,
    regression_curve,
)


class TestLossDensity:
    def test_value_at_zero_for_m2(self):
        # 1/(a B(a, 1)) = 1 because B(a, 1) = 1/a
        for a in (0.5, 3.0, 50.0):
            assert loss_density(0.0, a, 2) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("a,m", [(10.0, 4), (100.0, 20)])
    def test_normalised(self, a, m):
        # integrate in t = L/(L+a): dL = a/(1-t)^2 dt
        def integrand(t):
            L = a * t / (1 - t)
            return loss_density(L, a, m) * a / (1 - t) ** 2

        res = integrate(lambda t: np.vectorize(integrand)(t), 0.0, 1.0, rtol=1e-9)
        assert res.value == pytest.approx(1.0, abs=1e-8)

    def test_t_substitution_identity(self):
        # f_L(L) dL = Beta(t | m/2, a) dt at t = L/(L+a)
        rng = np.random.default_rng(5)
        a, m = 7.0, 9
        t = rng.uniform(1e-6, 1 - 1e-6, size=1000)
        L = a * t / (1 - t)
        lhs = loss_density(L, a, m) * a / (1 - t) ** 2
        rhs = beta_dist.pdf(t, m / 2, a)
        assert np.max(np.abs(lhs - rhs) / rhs) < 1e-10

    def test_domain(self):
        with pytest.raises(ValueError):
            loss_density(-1.0, 2.0, 4)


class TestLossCdf:
    def test_limits(self):
        assert loss_cdf(0.0, 5.0, 6) == 0.0
        assert loss_cdf(1e12, 5.0, 6) == pytest.approx(1.0, abs=1e-9)

    def test_matches_quadrature(self):
        a, m, L = 10.0, 4, 10.0
        oracle, err = quad(lambda x: loss_density(x, a, m), 0.0, L, epsrel=1e-12)
        assert err < 1e-9
        assert loss_cdf(L, a, m) == pytest.approx(oracle, abs=1e-9)

    def test_monotone(self):
        L = np.linspace(0, 50, 300)
        vals = loss_cdf(L, 10.0, 8)
        assert np.all(np.diff(vals) >= 0)


class TestErmLossDensity:
    def test_h_one_reduces_to_marginal(self):
        L = np.linspace(0.0, 30.0, 100)
        np.testing.assert_allclose(
            erm_loss_density(L, 8.0, 6, 1), loss_density(L, 8.0, 6), rtol=1e-12
        )

    @pytest.mark.parametrize("H", [10, 10**4])
    def test_normalised(self, H):
        a, m = 10.0, 6

        def integrand(t):
            L = a * t / (1 - t)
            return erm_loss_density(L, a, m, H) * a / (1 - t) ** 2

        res = integrate(lambda t: np.vectorize(integrand)(t), 0.0, 1.0, rtol=1e-9)
        assert res.value == pytest.approx(1.0, abs=1e-8)

    def test_mode_shifts_towards_zero(self):
        a, m = 10.0, 8
        L = np.linspace(1e-4, 20.0, 20000)
        mode_small_h = L[np.argmax(erm_loss_density(L, a, m, 10))]
        mode_large_h = L[np.argmax(erm_loss_density(L, a, m, 10**4))]
        assert mode_large_h < mode_small_h

    def test_nonnegative(self):
        L = np.linspace(0, 100, 500)
        assert np.all(erm_loss_density(L, 3.0, 5, 100) >= 0)


class TestExpectedErmRisk:
    def test_zero_loss_phase_value(self):
        # in the zero-loss phase (m well below 2 ln H) the curve sits on
        # a/(a + m/2 - 1); far outside it the minimum loss is macroscopic
        # (value pinned by two independent oracles: direct-form quadrature
        # and inverse-CDF Monte Carlo of the minimum)
        got = expected_erm_risk_regression(100.0, 20, 10**9)
        assert got == pytest.approx(100.0 / 109.0, rel=0.01)
        beyond = expected_erm_risk_regression(100.0, 100, 10**9)
        assert beyond == pytest.approx(0.777527, rel=1e-4)

    def test_h_one_matches_marginal_mean(self):
        # <R> = (a + <L>)/(a + m/2 - 1) with <L> = a (m/2) / (a - 1)
        a, m = 6.0, 10
        expect = (a + a * (m / 2) / (a - 1)) / (a + m / 2 - 1)
        got = expected_erm_risk_regression(a, m, 1)
        assert got == pytest.approx(expect, rel=1e-8)

    def test_monotone_in_h(self):
        a, m = 50.0, 60
        vals = [expected_erm_risk_regression(a, m, H) for H in (1, 10, 100, 10**4)]
        assert all(x >= y - 1e-12 for x, y in zip(vals, vals[1:]))

    def test_zero_loss_phase_envelope(self):
        a, H = 100.0, 10**9
        for m in (2, 10, 30, 50):
            got = expected_erm_risk_regression(a, m, H)
            ref = a / (a + m / 2 - 1)
            assert abs(got - ref) / ref < 0.05

    def test_leaving_zero_loss_phase_raises_risk(self):
        # fixed H: pushing m past ~2 ln H makes the minimum loss macroscopic
        # and the curve detach upward from a/(a + m/2 - 1)
        a, H = 100.0, 10**6
        inside = expected_erm_risk_regression(a, 10, H)
        outside = expected_erm_risk_regression(a, 100, H)
        assert abs(inside - a / (a + 4)) / (a / (a + 4)) < 0.01
        assert (outside - a / (a + 49)) / (a / (a + 49)) > 0.10

    def test_domain(self):
        with pytest.raises(ValueError):
            expected_erm_risk_regression(0.5, 0, 10)  # a + m/2 <= 1
        with pytest.raises(ValueError):
            expected_erm_risk_regression(2.0, 4, math.inf)

    def test_model_validation(self):
        with pytest.raises(ValueError):
            GammaPrecisionModel(-1.0, 10, 5)
        with pytest.raises(ValueError):
            GammaPrecisionModel(2.0, 0, 5)


class TestRegressionCurve:
    def test_better_attunement_wins_at_large_m(self):
        m_grid = np.array([200, 1000, 5000])
        lo = regression_curve(100.0, 10**4, m_grid)
        hi = regression_curve(1000.0, 10**4, m_grid)
        assert np.all(lo.y <= hi.y)

    def test_larger_h_never_worse(self):
        m_grid = np.array([1, 10, 100, 1000])
        small = regression_curve(100.0, 10**2, m_grid)
        large = regression_curve(100.0, 10**6, m_grid)
        assert np.all(large.y <= small.y + 1e-12)

    def test_zero_loss_phase_slope_on_loglog(self):
        # inside the zero-loss phase (2a << m << 2 ln H) risk ~ 2a/m: the
        # log-log slope approaches -1, the same shape the classification
        # curves show before their plateaus
        m_grid = np.unique(np.rint(np.geomspace(60, 160, 8)).astype(int))
        curve = regression_curve(3.0, 1e100, m_grid)
        slope = np.polyfit(np.log(curve.x), np.log(curve.y), 1)[0]
        assert slope == pytest.approx(-1.0, abs=0.1)

    def test_finite_h_plateau_at_best_in_class(self):
        # with a fixed pool the curve saturates at the best hypothesis's
        # risk instead of decaying forever
        m_grid = np.array([10**4, 10**5])
        curve = regression_curve(10.0, 10**2, m_grid)
        assert curve.y[1] > 0.3
        assert curve.y[1] == pytest.approx(curve.y[0], rel=0.05)

    def test_single_point_grid(self):
        curve = regression_curve(50.0, 10, np.array([7]))
        assert curve.x.size == 1
