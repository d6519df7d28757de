"""Annealed expected-ERM-risk computations for classification.

For a hypothesis with risk r the training loss on m independently drawn
examples is Binomial(m, r).  Treating hypothesis losses as independent (the
annealed approximation) the chain is:

* ``loss_pmf_*``   -- f_L(l), the loss distribution of a random hypothesis,
  marginalised over rho(r);
* ``prob_min_loss`` -- P(l = L_ERM) = (1-F(l-1))**H - (1-F(l))**H for a
  hypothesis space of size H;
* ``posterior_mean_risk`` -- <R | l>, the Bayes posterior mean risk of a
  hypothesis that scored loss l;
* ``expected_erm_risk`` -- their sum over l, or the closed forms where they
  exist: a/(a+b+m) for BetaRisk with unbounded H, and the ratio of
  integrals int r (1-r)^m rho / int (1-r)^m rho for realisable families.

Everything runs in log space, so m up to 1e6 is routine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import numerics
from .curve import Curve
from .risk_models import AllBoolean, BetaRisk, RiskDistribution

__all__ = [
    "ClassificationScenario",
    "LossPmf",
    "ExactRealisableInputs",
    "loss_pmf_beta",
    "loss_pmf_generic",
    "prob_min_loss",
    "posterior_mean_risk",
    "expected_erm_risk",
    "erm_curve",
    "exact_realisable_risk",
    "boolean_expected_erm",
]

_TAIL_CUTOFF = 1.0 - 1e-12


def _validate_h(H) -> float:
    H = float(H)
    if math.isnan(H) or H < 1:
        raise ValueError("hypothesis count H must be >= 1 (math.inf allowed)")
    return H


@dataclass(frozen=True)
class ClassificationScenario:
    """A risk distribution observed through m examples by H hypotheses."""

    dist: RiskDistribution
    m: int
    H: float  # positive count; math.inf for an unbounded space

    def __post_init__(self) -> None:
        if self.m < 0:
            raise ValueError("training-set size m must be nonnegative")
        _validate_h(self.H)


@dataclass(frozen=True)
class ExactRealisableInputs:
    """Dataset-conditional consistent fractions for the exact formula.

    ``m0`` is the fraction of hypotheses consistent with the data set and
    ``m1`` its risk-weighted counterpart.
    """

    m0: float
    m1: float
    H: float

    def __post_init__(self) -> None:
        if not 0 <= self.m0 <= 1:
            raise ValueError("m0 must lie in [0, 1]")
        if not 0 <= self.m1 <= self.m0:
            raise ValueError("m1 must lie in [0, m0]")
        _validate_h(self.H)


@dataclass(frozen=True)
class LossPmf:
    """Log-space pmf and survival function of the loss over l in {0..m}.

    ``log_survival[l] = ln P(L >= l)`` for l in 0..m+1 (the last entry is
    -inf); ``log_survival[0]`` is exactly zero.
    """

    log_mass: np.ndarray
    log_survival: np.ndarray

    @property
    def m(self) -> int:
        return self.log_mass.size - 1

    def mass(self, ell: int) -> float:
        return math.exp(self.log_mass[ell])

    def survival(self, ell: int) -> float:
        return math.exp(self.log_survival[ell])


def _survival_from_log_mass(log_mass: np.ndarray) -> np.ndarray:
    rev = np.logaddexp.accumulate(log_mass[::-1])[::-1]
    log_survival = np.concatenate((rev, [-np.inf]))
    log_survival[0] = 0.0  # P(L >= 0) = 1 by construction
    return np.minimum(log_survival, 0.0)


def loss_pmf_beta(a: float, b: float, m: int) -> LossPmf:
    """Loss pmf under rho = Beta(a, b):
    f_L(l) = C(m, l) B(a + l, b + m - l) / B(a, b + m)."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if m < 0:
        raise ValueError("m must be nonnegative")
    ell = np.arange(m + 1)
    log_choose = gammaln(m + 1) - gammaln(ell + 1) - gammaln(m - ell + 1)
    log_mass = (
        log_choose
        + numerics.log_beta(a + ell, b + m - ell)
        - numerics.log_beta(a, b + m)
    )
    # normalise away the last floating-point ulps so the invariants are exact
    log_mass = log_mass - float(np.logaddexp.reduce(log_mass))
    return LossPmf(log_mass, _survival_from_log_mass(log_mass))


def _log_kernel_integral(
    dist: RiskDistribution, ell: float, m_minus_ell: float, *, rtol: float, budget: int
) -> numerics.QuadratureResult:
    """ln int r**ell (1-r)**(m-ell) rho(r) dr over the support of rho."""
    lo, hi = dist.support()

    def g(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            t1 = ell * np.log(r) if ell != 0 else 0.0
            t2 = m_minus_ell * np.log1p(-r) if m_minus_ell != 0 else 0.0
        return t1 + t2 + dist.log_density(r)

    return numerics.integrate_log(g, lo, hi, rtol=rtol, budget=budget, locate_peak=True)


def loss_pmf_generic(
    dist: RiskDistribution, m: int, *, rtol: float = 1e-10, budget: int = 10**6
) -> LossPmf:
    """Loss pmf for any continuous rho via log-space quadrature:
    f_L(l) = C(m, l) int r**l (1-r)**(m-l) rho(r) dr."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    ell = np.arange(m + 1)
    log_choose = gammaln(m + 1) - gammaln(ell + 1) - gammaln(m - ell + 1)
    log_int = np.empty(m + 1)
    flagged = []
    for k in range(m + 1):
        res = _log_kernel_integral(dist, k, m - k, rtol=rtol, budget=budget)
        if not res.converged:
            flagged.append(k)
        log_int[k] = res.log
    if flagged:
        raise ArithmeticError(f"quadrature did not converge for losses {flagged}")
    log_mass = log_choose + log_int
    log_mass = log_mass - float(np.logaddexp.reduce(log_mass))
    return LossPmf(log_mass, _survival_from_log_mass(log_mass))


def prob_min_loss(pmf: LossPmf, H, ell: int) -> float:
    """P(l = L_ERM) for a finite hypothesis space of size H."""
    H = _validate_h(H)
    if math.isinf(H):
        raise ValueError("prob_min_loss requires finite H; use the realisable path")
    if not 0 <= ell <= pmf.m:
        raise ValueError("loss level out of range")
    s_hi = pmf.log_survival[ell]
    s_lo = pmf.log_survival[ell + 1]
    if s_hi == -math.inf:
        return 0.0
    # exp(H s_hi) - exp(H s_lo), kept stable when both are close to one
    return float(-np.expm1(H * (s_lo - s_hi)) * np.exp(H * s_hi))


def posterior_mean_risk(
    dist: RiskDistribution, m: int, ell: int, *, rtol: float = 1e-10, budget: int = 10**6
) -> float:
    """<R | l>: posterior mean risk of a hypothesis with loss l on m examples."""
    if not 0 <= ell <= m:
        raise ValueError("loss level out of range")
    closed = _closed_form_shapes(dist)
    if closed is not None:
        a, b = closed
        return (a + ell) / (m + a + b)
    num = _log_kernel_integral(dist, ell + 1, m - ell, rtol=rtol, budget=budget)
    den = _log_kernel_integral(dist, ell, m - ell, rtol=rtol, budget=budget)
    if not (num.converged and den.converged):
        raise ArithmeticError("posterior mean risk quadrature did not converge")
    return math.exp(num.log - den.log)


def _closed_form_shapes(dist: RiskDistribution) -> tuple[float, float] | None:
    """Beta shapes when the distribution is, or is modelled by, a beta."""
    if isinstance(dist, BetaRisk):
        return dist.a, dist.b
    if isinstance(dist, AllBoolean):
        approx = dist.beta_approximation()
        return approx.a, approx.b
    return None


def expected_erm_risk(
    scenario: ClassificationScenario, *, rtol: float = 1e-10, budget: int = 10**6
) -> float:
    """Expected risk of a uniformly chosen minimum-training-loss hypothesis.

    Unbounded H: the zero-loss ratio of integrals (closed form a/(a+b+m)
    for beta-shaped rho).  For an unrealisable rho the same ratio runs over
    its support, reproducing the plateau at the minimum risk.  Finite H:
    the sum over loss levels, truncated once the minimum-loss distribution
    has accumulated all but 1e-12 of its mass.
    """
    dist, m, H = scenario.dist, scenario.m, float(scenario.H)
    closed = _closed_form_shapes(dist)
    if math.isinf(H):
        if closed is not None:
            a, b = closed
            return a / (a + b + m)
        num = _log_kernel_integral(dist, 1, m, rtol=rtol, budget=budget)
        den = _log_kernel_integral(dist, 0, m, rtol=rtol, budget=budget)
        if not (num.converged and den.converged):
            raise ArithmeticError("expected ERM risk quadrature did not converge")
        return math.exp(num.log - den.log)

    if closed is not None:
        a, b = closed
        pmf = loss_pmf_beta(a, b, m)
        posterior = lambda ell: (a + ell) / (m + a + b)  # noqa: E731
    else:
        pmf = loss_pmf_generic(dist, m, rtol=rtol, budget=budget)
        posterior = lambda ell: posterior_mean_risk(  # noqa: E731
            dist, m, ell, rtol=rtol, budget=budget
        )

    total = 0.0
    cumulative = 0.0
    for ell in range(m + 1):
        p = prob_min_loss(pmf, H, ell)
        if p > 0.0:
            total += posterior(ell) * p
            cumulative += p
        if cumulative >= _TAIL_CUTOFF:
            break
    return total


def erm_curve(
    dist: RiskDistribution,
    H,
    m_grid,
    *,
    rtol: float = 1e-10,
    budget: int = 10**6,
) -> Curve:
    """Expected ERM risk at every m of a strictly increasing integer grid."""
    m_grid = np.asarray(m_grid, dtype=int)
    if m_grid.size == 0 or np.any(np.diff(m_grid) <= 0):
        raise ValueError("m_grid must be non-empty and strictly increasing")
    H = _validate_h(H)
    y = np.empty(m_grid.size)
    for i, m in enumerate(m_grid):
        try:
            y[i] = expected_erm_risk(
                ClassificationScenario(dist, int(m), H), rtol=rtol, budget=budget
            )
        except ArithmeticError as exc:
            raise ArithmeticError(f"curve point m={m} failed: {exc}") from exc
    metadata = {"model": dist.descriptor(), "H": "inf" if math.isinf(H) else f"{H:.12g}"}
    slack = 1e-9 * np.maximum(y[1:], y[:-1])
    if np.any(y[1:] > y[:-1] + slack):
        metadata["warning"] = "curve not monotone nonincreasing beyond tolerance"
    return Curve(m_grid.astype(float), y, "m", "risk", metadata)


def exact_realisable_risk(inputs: ExactRealisableInputs) -> float:
    """Dataset-conditional expected ERM risk (M1/M0) (1 - (1-M0)**H)."""
    m0, m1, H = inputs.m0, inputs.m1, float(inputs.H)
    if m0 == 0:
        raise ValueError("empty version space: no hypothesis is consistent")
    ratio = m1 / m0
    if math.isinf(H):
        return ratio
    if m0 == 1.0:
        return ratio  # all hypotheses consistent, (1-M0)^H vanishes
    return ratio * float(-np.expm1(H * math.log1p(-m0)))


def boolean_expected_erm(n_inputs: int, m: int) -> float:
    """Expected ERM risk n/(2n+m) of the all-Boolean-functions surrogate."""
    if n_inputs < 1:
        raise ValueError("n_inputs must be positive")
    if m < 0:
        raise ValueError("m must be nonnegative")
    return n_inputs / (2.0 * n_inputs + m)
