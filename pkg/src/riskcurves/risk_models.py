"""Risk-distribution families.

A risk distribution rho(r) gives the proportion of hypotheses of a learning
machine whose expected error (risk) equals r.  Four families are provided:

* :class:`BetaRisk` -- rho(r) = Beta(r | a, b).  The shape ``a`` is the
  *attunement*: the power-law exponent of rho near r = 0, which governs the
  asymptotic learning curve a / m.
* :class:`AllBoolean` -- the hypothesis space of all Boolean functions over
  ``n_inputs`` distinct inputs.  Error counts are exactly
  Binomial(n_inputs, 1/2); curve computations use the matching
  Beta(n/2, n/2) surrogate, which has the same mean and nearly the same
  variance n/4.
* :class:`RealisablePerceptron` -- a p-feature perceptron labelled by a
  teacher perceptron on isotropic Gaussian inputs.  Uniformly drawn weight
  vectors sit at angle theta to the teacher with density
  sin(theta)**(p-2) / B(1/2, (p-1)/2), and the risk is theta / pi.
* :class:`UnrealisablePerceptron` -- class-conditional Gaussian inputs with
  mean separation ``delta`` along the teacher direction.  A weight vector at
  angle theta carries risk Phi(-delta * cos(theta)), so risks live in
  [Phi(-delta), Phi(delta)] and no hypothesis reaches zero risk.

``delta`` is stored as a positive magnitude: only its size affects the
distribution, and the minimum risk is Phi(-delta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .numerics import log_beta, normal_cdf, normal_quantile

__all__ = [
    "RiskDistribution",
    "BetaRisk",
    "AllBoolean",
    "RealisablePerceptron",
    "UnrealisablePerceptron",
    "BetaApprox",
    "risk_of_angle",
    "from_descriptor",
]


@dataclass(frozen=True)
class BetaApprox:
    """Shape parameters of a Beta(a, b) surrogate for a risk distribution."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if self.a <= 0 or self.b <= 0:
            raise ValueError("beta shape parameters must be positive")


def _check_unit_interval(r: np.ndarray) -> None:
    if np.any(r < 0) or np.any(r > 1):
        raise ValueError("risk values must lie in [0, 1]")


class RiskDistribution:
    """Common surface of the rho(r) families."""

    def log_density(self, r):
        raise NotImplementedError

    def density(self, r):
        """rho(r); zero outside the support, error outside [0, 1]."""
        out = np.exp(self.log_density(r))
        return float(out) if np.ndim(out) == 0 else out

    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def attunement(self) -> float:
        raise NotImplementedError

    def beta_approximation(self) -> BetaApprox:
        raise NotImplementedError

    def descriptor(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class BetaRisk(RiskDistribution):
    a: float
    b: float

    def __post_init__(self) -> None:
        if self.a <= 0 or self.b <= 0:
            raise ValueError("BetaRisk requires positive shape parameters")

    def log_density(self, r):
        r = np.asarray(r, dtype=float)
        _check_unit_interval(r)
        out = np.full(r.shape, -np.inf)
        ln_b = log_beta(self.a, self.b)
        interior = (r > 0) & (r < 1)
        with np.errstate(divide="ignore"):
            ri = r[interior]
            out[interior] = (self.a - 1) * np.log(ri) + (self.b - 1) * np.log1p(-ri) - ln_b
        # one-sided limits at the endpoints
        for edge, shape in ((r == 0, self.a), (r == 1, self.b)):
            if np.any(edge):
                if shape < 1:
                    out[edge] = np.inf
                elif shape == 1:
                    out[edge] = -ln_b
        return float(out) if np.ndim(r) == 0 else out

    def support(self) -> tuple[float, float]:
        return (0.0, 1.0)

    def attunement(self) -> float:
        return self.a

    def beta_approximation(self) -> BetaApprox:
        return BetaApprox(self.a, self.b)

    def descriptor(self) -> str:
        return f"beta:a={self.a!r},b={self.b!r}"


@dataclass(frozen=True)
class AllBoolean(RiskDistribution):
    n_inputs: int

    def __post_init__(self) -> None:
        if self.n_inputs < 1:
            raise ValueError("AllBoolean requires a positive input count")

    def error_count_pmf(self) -> np.ndarray:
        """Exact pmf of the error count E ~ Binomial(n_inputs, 1/2)."""
        n = self.n_inputs
        e = np.arange(n + 1)
        log_pmf = gammaln(n + 1) - gammaln(e + 1) - gammaln(n - e + 1) - n * math.log(2.0)
        return np.exp(log_pmf)

    def _surrogate(self) -> BetaRisk:
        return BetaRisk(self.n_inputs / 2.0, self.n_inputs / 2.0)

    def log_density(self, r):
        # continuous surrogate used by all curve computations
        return self._surrogate().log_density(r)

    def support(self) -> tuple[float, float]:
        return (0.0, 1.0)

    def attunement(self) -> float:
        return self.n_inputs / 2.0

    def beta_approximation(self) -> BetaApprox:
        return BetaApprox(self.n_inputs / 2.0, self.n_inputs / 2.0)

    def descriptor(self) -> str:
        return f"boolean:n={self.n_inputs}"


@dataclass(frozen=True)
class RealisablePerceptron(RiskDistribution):
    p: int

    def __post_init__(self) -> None:
        if self.p < 3:
            raise ValueError("RealisablePerceptron requires p >= 3")

    def log_density(self, r):
        r = np.asarray(r, dtype=float)
        _check_unit_interval(r)
        ln_const = math.log(math.pi) - log_beta(0.5, (self.p - 1) / 2.0)
        # sin(pi r) evaluated at min(r, 1-r) keeps precision near r = 1
        s = np.sin(np.pi * np.minimum(r, 1.0 - r))
        with np.errstate(divide="ignore"):
            out = ln_const + (self.p - 2) * np.log(s)
        return float(out) if np.ndim(r) == 0 else out

    def support(self) -> tuple[float, float]:
        return (0.0, 1.0)

    def attunement(self) -> float:
        return float(self.p - 1)

    def beta_approximation(self) -> BetaApprox:
        return BetaApprox(float(self.p - 1), float(self.p - 1))

    def descriptor(self) -> str:
        return f"perceptron:p={self.p}"


@dataclass(frozen=True)
class UnrealisablePerceptron(RiskDistribution):
    p: int
    delta: float

    def __post_init__(self) -> None:
        if self.p < 4:
            raise ValueError("UnrealisablePerceptron requires p >= 4")
        if self.delta <= 0:
            raise ValueError("delta must be a positive separation magnitude")

    def log_density(self, r):
        r = np.asarray(r, dtype=float)
        _check_unit_interval(r)
        r_min, r_max = self.support()
        out = np.full(r.shape, -np.inf)
        inside = (r > r_min) & (r < r_max)
        if np.any(inside):
            z = normal_quantile(r[inside])
            u = z / self.delta
            ln_const = (
                0.5 * math.log(2.0 * math.pi)
                - math.log(self.delta)
                - log_beta(0.5, (self.p - 1) / 2.0)
            )
            with np.errstate(divide="ignore", invalid="ignore"):
                bracket = np.maximum(1.0 - u * u, 0.0)
                out[inside] = ln_const + 0.5 * (self.p - 3) * np.log(bracket) + 0.5 * z * z
        return float(out) if np.ndim(r) == 0 else out

    def support(self) -> tuple[float, float]:
        return (normal_cdf(-self.delta), normal_cdf(self.delta))

    def attunement(self) -> float:
        raise ValueError(
            "attunement undefined at r=0 for an unrealisable distribution; "
            "its asymptotics are set by the minimum risk and the growth above it"
        )

    def beta_approximation(self) -> BetaApprox:
        raise ValueError("no beta surrogate for an unrealisable perceptron")

    def descriptor(self) -> str:
        return f"uperceptron:p={self.p},delta={self.delta!r}"


def risk_of_angle(theta, dist: RiskDistribution):
    """Risk of a perceptron weight vector at angle theta to the teacher.

    Realisable data: risk = theta / pi.  Separated-Gaussian (unrealisable)
    data: risk = Phi(-delta * cos(theta)).  Monotone nondecreasing in theta.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0) or np.any(theta > math.pi):
        raise ValueError("theta must lie in [0, pi]")
    if isinstance(dist, RealisablePerceptron):
        out = theta / math.pi
    elif isinstance(dist, UnrealisablePerceptron):
        out = normal_cdf(-dist.delta * np.cos(theta))
    else:
        raise TypeError("risk_of_angle supports only the perceptron families")
    return float(out) if np.ndim(theta) == 0 else out


def from_descriptor(text: str) -> RiskDistribution:
    """Parse ``kind:key=value,...`` into a distribution.

    Grammar: ``beta:a=100,b=11.1111`` | ``boolean:n=1024`` |
    ``perceptron:p=20`` | ``uperceptron:p=10,delta=0.6745``.
    """
    kind, _, tail = text.strip().partition(":")
    params: dict[str, str] = {}
    if tail:
        for item in tail.split(","):
            key, _, value = item.partition("=")
            if not value:
                raise ValueError(f"malformed distribution parameter {item!r}")
            params[key.strip()] = value.strip()
    try:
        if kind == "beta":
            return BetaRisk(float(params.pop("a")), float(params.pop("b")))
        if kind == "boolean":
            return AllBoolean(int(params.pop("n")))
        if kind == "perceptron":
            return RealisablePerceptron(int(params.pop("p")))
        if kind == "uperceptron":
            return UnrealisablePerceptron(int(params.pop("p")), float(params.pop("delta")))
    except KeyError as exc:
        raise ValueError(f"missing parameter {exc} for distribution kind {kind!r}") from None
    raise ValueError(f"unknown distribution kind {kind!r}")
