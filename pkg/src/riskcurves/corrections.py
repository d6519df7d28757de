"""Fluctuation-corrected generalisation curves for the realisable perceptron.

The annealed approximation replaces the dataset-conditional consistent
fraction p(r, D) -- the proportion of risk-r hypotheses that classify all m
training examples -- by its mean (1-r)**m.  Because ln p(r, D) is a sum of
m independent per-example log-factors, the typical value is governed by the
mean of the log instead.  Modelling each per-example factor as a beta
variable with the perceptron's pairwise-agreement variance

    v_r = r(1-r) - arccos(cos^2(pi r)) / (2 pi)

gives shape parameters A_r = (1-r)/Delta_r, B_r = r/Delta_r with

    Delta_r = 2 pi r (1-r) / arccos(cos^2(pi r)) - 1,

and the typical consistency profile

    ln p_hat(r) = m (psi(A_r) - psi(A_r + B_r))  <=  m ln(1-r),

the inequality being Jensen's.  Replacing (1-r)**m with p_hat(r) in the
zero-loss ratio of integrals yields the corrected curves; letting the
feature count grow without bound at fixed alpha = m/p turns the posterior
into a point mass at the maximiser of ln sin(pi r) + alpha c(r), which is
how :func:`limit_curve` evaluates both variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .curve import Curve
from .risk_models import RealisablePerceptron

__all__ = [
    "FluctuationParams",
    "delta_r",
    "consistency_variance",
    "fluctuation_params",
    "log_p_hat",
    "corrected_expected_erm",
    "limit_curve",
]

_SQRT2_MINUS_1 = math.sqrt(2.0) - 1.0
# below this, psi(A)-psi(A+B) and ln(1-r) agree to ~1e-13 absolute
_DELTA_FLOOR = 1e-12


def _arccos_cos_sq(r):
    """arccos(cos^2(pi r)) evaluated without cancellation.

    Uses arccos(1 - w) = 2 arcsin(sqrt(w / 2)) with w = sin^2(pi r), which
    is exact and stays fully conditioned as r -> 0 or r -> 1.
    """
    r = np.asarray(r, dtype=float)
    s = np.sin(np.pi * np.minimum(r, 1.0 - r))
    return 2.0 * np.arcsin(s / math.sqrt(2.0))


def delta_r(r):
    """Dispersion parameter of the per-example consistency factor.

    Tends to sqrt(2) - 1 as r -> 0 and vanishes at r = 1/2 (where the
    per-example factor becomes deterministic and the annealed value is
    recovered).
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) or np.any(r >= 1):
        raise ValueError("delta_r requires 0 < r < 1")
    out = 2.0 * np.pi * r * (1.0 - r) / _arccos_cos_sq(r) - 1.0
    out = np.maximum(out, 0.0)  # clip -1ulp rounding at r = 1/2
    return float(out) if np.ndim(r) == 0 else out


def consistency_variance(r):
    """v_r = r(1-r) - arccos(cos^2(pi r)) / (2 pi), the variance of the
    per-example consistency factor; nonnegative on (0, 1/2] and zero at 1/2."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > 1):
        raise ValueError("consistency_variance requires r in [0, 1]")
    out = r * (1.0 - r) - _arccos_cos_sq(r) / (2.0 * np.pi)
    return float(out) if np.ndim(r) == 0 else out


@dataclass(frozen=True)
class FluctuationParams:
    """Beta-model parameters of the per-example consistency factor at risk r."""

    r: float
    delta: float
    a: float  # (1 - r) / delta
    b: float  # r / delta
    variance: float


def fluctuation_params(r: float) -> FluctuationParams:
    if not 0 < r < 1:
        raise ValueError("fluctuation_params requires 0 < r < 1")
    d = float(delta_r(r))
    if d == 0.0:
        return FluctuationParams(r, 0.0, math.inf, math.inf, float(consistency_variance(r)))
    return FluctuationParams(r, d, (1.0 - r) / d, r / d, float(consistency_variance(r)))


def _mean_log_factor(r):
    """psi(A_r) - psi(A_r + B_r): the per-example mean log consistency."""
    r = np.asarray(r, dtype=float)
    out = np.empty(r.shape)
    zero = r == 0
    out[zero] = 0.0
    rest = ~zero
    if np.any(rest):
        rr = r[rest]
        d = np.asarray(delta_r(rr))
        annealed = np.log1p(-rr)
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.where(d > 0, (1.0 - rr) / np.where(d > 0, d, 1.0), np.inf)
            total = np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0), np.inf)
            corrected = np.where(
                d > _DELTA_FLOOR,
                numerics.digamma(np.maximum(a, 1e-300))
                - numerics.digamma(np.maximum(total, 1e-300)),
                annealed,
            )
        out[rest] = corrected
    return out


def log_p_hat(r, m):
    """ln of the typical consistency fraction at risk r after m examples.

    Zero at r = 0 (a zero-risk hypothesis is always consistent) and bounded
    above by the annealed value m ln(1-r).
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r >= 1):
        raise ValueError("log_p_hat requires 0 <= r < 1")
    if m < 0:
        raise ValueError("m must be nonnegative")
    out = m * _mean_log_factor(r)
    return float(out) if np.ndim(r) == 0 else out


def corrected_expected_erm(
    p: int, m, *, rtol: float = 1e-9, budget: int = 10**6
) -> float:
    """Fluctuation-corrected expected ERM risk of the realisable perceptron.

    Evaluates int r p_hat(r) rho(r) dr / int p_hat(r) rho(r) dr with
    rho(r) proportional to sin(pi r)**(p-2).  Equals 1/2 at m = 0 and lies
    below the annealed prediction once the typical-consistency penalty
    bites.
    """
    dist = RealisablePerceptron(p)
    if m < 0:
        raise ValueError("m must be nonnegative")

    def g_den(r):
        r = np.asarray(r, dtype=float)
        return dist.log_density(r) + log_p_hat(r, m)

    def g_num(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(r) + g_den(r)

    lo, hi = 0.0, 1.0
    num = numerics.integrate_log(g_num, lo, hi, rtol=rtol, budget=budget, locate_peak=True)
    den = numerics.integrate_log(g_den, lo, hi, rtol=rtol, budget=budget, locate_peak=True)
    if not (num.converged and den.converged):
        raise ArithmeticError("corrected risk quadrature did not converge")
    return math.exp(num.log - den.log)


_VARIANTS = ("annealed", "corrected")


def limit_curve(
    alpha_grid,
    variant: str,
    *,
    r_floor: float = 1e-9,
    tol: float = 1e-12,
) -> Curve:
    """Generalisation curve of the infinitely wide perceptron versus
    alpha = m / p.

    At each alpha the posterior over risks concentrates at the maximiser of

        g(r) = ln sin(pi r) + alpha * c(r),   r in (0, 1/2],

    where c(r) is ln(1-r) for the annealed variant and
    psi(A_r) - psi(A_r + B_r) for the corrected one.  The curve value is
    that maximiser; it starts at 1/2 for alpha -> 0 and decays like 1/alpha.
    """
    if variant not in _VARIANTS:
        raise ValueError(f"variant must be one of {_VARIANTS}")
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    if np.any(alpha_grid <= 0):
        raise ValueError("alpha values must be positive")
    if np.any(np.diff(alpha_grid) <= 0):
        raise ValueError("alpha grid must be strictly increasing")

    if variant == "annealed":
        rate = lambda r: math.log1p(-r)  # noqa: E731
    else:
        rate = lambda r: float(_mean_log_factor(np.asarray(r, dtype=float)))  # noqa: E731

    boundary_hits = 0
    out = np.empty(alpha_grid.size)
    for i, alpha in enumerate(alpha_grid):
        def g(r: float) -> float:
            return math.log(math.sin(math.pi * r)) + alpha * rate(r)

        r_star, _ = numerics.maximize_unimodal(g, r_floor, 0.5, tol=tol)
        if r_star <= 2.0 * r_floor:
            boundary_hits += 1
        out[i] = min(r_star, 0.5)
    metadata = {"variant": variant}
    if boundary_hits:
        metadata["warning"] = f"{boundary_hits} maximiser(s) pinned at the lower boundary"
    return Curve(alpha_grid, out, "alpha", "risk", metadata)
