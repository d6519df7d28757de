"""Stable special functions, adaptive quadrature and 1-D maximisation.

Every routine here is pure and reentrant.  The quadrature is a global
adaptive scheme (worst-panel-first bisection, fixed-order Gauss-Legendre
rule per panel) with an optional log-space mode: :func:`integrate_log`
accumulates ``ln \\int exp(g)`` through log-sum-exp, which is the only way
kernels like ``(1-r)**m`` stay representable once ``m`` reaches 1e4-1e6.

Special functions delegate to the Cephes-grade implementations in
``scipy.special``; the wrappers add the domain checks used throughout the
package.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special as _sp

__all__ = [
    "LogValue",
    "QuadratureResult",
    "log_beta",
    "digamma",
    "reg_inc_beta",
    "normal_cdf",
    "normal_quantile",
    "integrate",
    "integrate_log",
    "maximize_unimodal",
]


# --------------------------------------------------------------------------
# log-domain scalar
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LogValue:
    """A nonnegative quantity stored as its natural logarithm.

    Keeps magnitudes like ``B(a, b + m)`` for ``m = 1e6`` representable far
    below the double-precision underflow threshold.  Addition goes through
    log-sum-exp and therefore never overflows for finite operands.
    """

    log: float

    @classmethod
    def from_value(cls, value: float) -> "LogValue":
        if value < 0:
            raise ValueError("LogValue represents nonnegative quantities")
        return cls(math.log(value) if value > 0 else -math.inf)

    @property
    def value(self) -> float:
        return math.exp(self.log)

    def __float__(self) -> float:
        return self.value

    def __add__(self, other: "LogValue") -> "LogValue":
        return LogValue(float(np.logaddexp(self.log, other.log)))

    def __mul__(self, other: "LogValue") -> "LogValue":
        return LogValue(self.log + other.log)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        return LogValue(self.log - other.log)

    def __lt__(self, other: "LogValue") -> bool:
        return self.log < other.log

    def __le__(self, other: "LogValue") -> bool:
        return self.log <= other.log


# --------------------------------------------------------------------------
# special functions
# --------------------------------------------------------------------------


def log_beta(a, b):
    """ln B(a, b) for a, b > 0 (symmetric in its arguments)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("log_beta requires positive arguments")
    out = _sp.betaln(a, b)
    return float(out) if out.ndim == 0 else out


def digamma(x):
    """psi(x) = d/dx ln Gamma(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("digamma requires positive arguments")
    out = _sp.psi(x)
    return float(out) if out.ndim == 0 else out


def reg_inc_beta(t, a, b):
    """Regularized incomplete beta I_t(a, b), monotone in t on [0, 1]."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > 1):
        raise ValueError("reg_inc_beta requires t in [0, 1]")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("reg_inc_beta requires positive shape parameters")
    out = _sp.betainc(a, b, t)
    return float(out) if out.ndim == 0 else out


def normal_cdf(z):
    """Standard normal CDF Phi(z)."""
    out = _sp.ndtr(np.asarray(z, dtype=float))
    return float(out) if out.ndim == 0 else out


def normal_quantile(u):
    """Inverse of :func:`normal_cdf`; requires 0 < u < 1."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(u >= 1):
        raise ValueError("normal_quantile requires 0 < u < 1")
    out = _sp.ndtri(u)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# adaptive quadrature
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureResult:
    """Outcome of an adaptive integration.

    ``value`` is a plain float for :func:`integrate` and a :class:`LogValue`
    (the log of the integral) for :func:`integrate_log`.  ``error_estimate``
    is absolute for the linear mode and relative for the log mode.
    """

    value: float | LogValue
    error_estimate: float
    evaluations: int
    converged: bool

    @property
    def log(self) -> float:
        if not isinstance(self.value, LogValue):
            raise TypeError("not a log-space result")
        return self.value.log


_NODES_LO, _WEIGHTS_LO = np.polynomial.legendre.leggauss(7)
_NODES_HI, _WEIGHTS_HI = np.polynomial.legendre.leggauss(15)
_LOG_WEIGHTS_LO = np.log(_WEIGHTS_LO)
_LOG_WEIGHTS_HI = np.log(_WEIGHTS_HI)
_EVALS_PER_PANEL = _NODES_LO.size + _NODES_HI.size
_DEFAULT_SEED_PANELS = 8


def _too_narrow(a: float, b: float) -> bool:
    # a few ulps at the panel's own scale; lets cascades toward zero descend
    # into the denormal range while halting at float spacing elsewhere
    return (b - a) < max(4e-16 * max(abs(a), abs(b)), 1e-300)


def _clamped_to_open_interval(f, lo: float, hi: float):
    """Keep abscissae strictly inside (lo, hi).

    Deep bisection towards a panel edge can round a Gauss node onto the
    endpoint itself, which matters when the integrand is singular there.
    """
    lo_open = np.nextafter(lo, hi)
    hi_open = np.nextafter(hi, lo)

    def clamped(x):
        return f(np.clip(x, lo_open, hi_open))

    return clamped


def _initial_edges(lo: float, hi: float, points) -> np.ndarray:
    if points is not None:
        interior = np.asarray([p for p in np.atleast_1d(points) if lo < p < hi], dtype=float)
        edges = np.unique(np.concatenate(([lo, hi], interior)))
        # bisect once more so every seeded feature sits next to a small panel
        edges = np.unique(np.concatenate((edges, 0.5 * (edges[1:] + edges[:-1]))))
        return edges
    return np.linspace(lo, hi, _DEFAULT_SEED_PANELS + 1)


def _panel_linear(f, a: float, b: float) -> tuple[float, float]:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    hi = half * float(np.dot(_WEIGHTS_HI, np.asarray(f(mid + half * _NODES_HI), dtype=float)))
    lo = half * float(np.dot(_WEIGHTS_LO, np.asarray(f(mid + half * _NODES_LO), dtype=float)))
    return hi, lo


def _panel_log(g, a: float, b: float) -> tuple[float, float]:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    log_half = math.log(half)
    gv_hi = np.asarray(g(mid + half * _NODES_HI), dtype=float)
    gv_lo = np.asarray(g(mid + half * _NODES_LO), dtype=float)
    with np.errstate(invalid="ignore"):
        hi = log_half + float(_sp.logsumexp(gv_hi + _LOG_WEIGHTS_HI))
        lo = log_half + float(_sp.logsumexp(gv_lo + _LOG_WEIGHTS_LO))
    return hi, lo


def _log_abs_diff(x: float, y: float) -> float:
    # log|e^x - e^y|; -inf when both agree (incl. both -inf)
    hi, lo = (x, y) if x >= y else (y, x)
    if hi == -math.inf or hi == lo:
        return -math.inf
    return hi + math.log1p(-math.exp(min(lo - hi, 0.0)))


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    *,
    rtol: float = 1e-10,
    atol: float = 0.0,
    budget: int = 10**6,
    points: Sequence[float] | None = None,
) -> QuadratureResult:
    """Adaptively integrate ``f`` over (lo, hi).

    ``f`` must accept numpy arrays of abscissae.  Nodes never touch the
    endpoints, so integrable endpoint singularities are acceptable; the
    worst-panel-first bisection pays for them with extra subdivision levels.
    ``points`` seeds panel boundaries at known features (peaks, kinks).
    """
    if not lo < hi:
        raise ValueError("integrate requires lo < hi")
    edges = _initial_edges(lo, hi, points)
    fc = _clamped_to_open_interval(f, lo, hi)

    heap: list[tuple[float, int, float, float, float]] = []
    frozen_value = 0.0
    frozen_error = 0.0
    counter = 0
    evaluations = 0
    for a, b in zip(edges[:-1], edges[1:]):
        v_hi, v_lo = _panel_linear(fc, a, b)
        evaluations += _EVALS_PER_PANEL
        counter += 1
        heapq.heappush(heap, (-abs(v_hi - v_lo), counter, a, b, v_hi))

    # totals are recomputed only every ~|heap|/8 splits (keeping the loop
    # O(n log n)); a stagnating error estimate - the integrand's own noise
    # floor - ends the refinement honestly instead of burning the budget
    until_check = 0
    stagnant = 0
    last_err = math.inf
    while True:
        exhausted = not heap or evaluations + 2 * _EVALS_PER_PANEL > budget
        if until_check <= 0 or exhausted:
            total = frozen_value + sum(item[4] for item in heap)
            heap_err = sum(-item[0] for item in heap)
            err = frozen_error + heap_err
            if math.isfinite(total) and err <= max(atol, rtol * abs(total)):
                return QuadratureResult(total, err, evaluations, True)
            frozen_dominates = frozen_error > 0.0 and heap_err <= 0.05 * frozen_error
            stagnant = stagnant + 1 if err > 0.99 * last_err else 0
            last_err = err
            if exhausted or frozen_dominates or stagnant >= 5:
                return QuadratureResult(total, err, evaluations, False)
            until_check = max(4, len(heap) // 8)
        neg_err, _, a, b, v = heapq.heappop(heap)
        until_check -= 1
        if _too_narrow(a, b):
            frozen_value += v
            frozen_error += -neg_err
            continue
        mid = 0.5 * (a + b)
        for c, d in ((a, mid), (mid, b)):
            v_hi, v_lo = _panel_linear(fc, c, d)
            evaluations += _EVALS_PER_PANEL
            counter += 1
            heapq.heappush(heap, (-abs(v_hi - v_lo), counter, c, d, v_hi))


def _locate_peak_points(g, lo: float, hi: float) -> list[float]:
    """Split points around the maximiser of a peaked log-integrand."""
    span = hi - lo
    x_star, _ = maximize_unimodal(lambda x: float(g(x)), lo, hi, tol=span * 1e-8)
    h = max(span * 1e-6, abs(x_star) * 1e-8, 1e-300)
    xs = np.clip([x_star - h, x_star, x_star + h], lo, hi)
    g0, g1, g2 = (float(g(x)) for x in xs)
    curvature = -(g0 - 2.0 * g1 + g2) / h**2
    if not math.isfinite(curvature) or curvature <= 0:
        return [x_star]
    sigma = 1.0 / math.sqrt(curvature)
    offsets = (-30.0, -10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0, 30.0)
    return [x_star + k * sigma for k in offsets]


def integrate_log(
    g: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    *,
    rtol: float = 1e-10,
    budget: int = 10**6,
    points: Sequence[float] | None = None,
    locate_peak: bool = False,
) -> QuadratureResult:
    """Compute ``ln \\int_lo^hi exp(g(x)) dx`` adaptively.

    The integrand is supplied as a log-density; panel sums and the global
    total go through log-sum-exp, so the result is meaningful even when the
    integral underflows double precision by thousands of orders of
    magnitude.  ``locate_peak=True`` runs a golden-section search for the
    mode of ``g`` first and seeds panels on a curvature-derived scale around
    it, which is essential for kernels concentrated on a ~1/sqrt(m) width.
    """
    if not lo < hi:
        raise ValueError("integrate_log requires lo < hi")
    gc = _clamped_to_open_interval(g, lo, hi)
    seed_points = list(np.atleast_1d(points)) if points is not None else []
    if locate_peak:
        seed_points.extend(_locate_peak_points(gc, lo, hi))
    edges = _initial_edges(lo, hi, seed_points if seed_points else None)

    heap: list[tuple[float, int, float, float, float]] = []
    frozen: list[tuple[float, float]] = []  # (log_value, log_error)
    counter = 0
    evaluations = 0
    for a, b in zip(edges[:-1], edges[1:]):
        l_hi, l_lo = _panel_log(gc, a, b)
        evaluations += _EVALS_PER_PANEL
        counter += 1
        heapq.heappush(heap, (-_log_abs_diff(l_hi, l_lo), counter, a, b, l_hi))

    def _logsum(values: list[float]) -> float:
        finite = [v for v in values if v > -math.inf]
        return float(_sp.logsumexp(np.asarray(finite))) if finite else -math.inf

    # same loop discipline as the linear mode: periodic total checks plus a
    # stagnation exit at the integrand's numerical noise floor
    log_rtol = math.log(rtol)
    until_check = 0
    stagnant = 0
    last_log_err = math.inf
    while True:
        exhausted = not heap or evaluations + 2 * _EVALS_PER_PANEL > budget
        if until_check <= 0 or exhausted:
            log_total = _logsum([item[4] for item in heap] + [fv for fv, _ in frozen])
            log_heap_err = _logsum([-item[0] for item in heap])
            log_frozen_err = _logsum([fe for _, fe in frozen])
            log_err = float(np.logaddexp(log_heap_err, log_frozen_err))
            if log_err <= log_total + log_rtol or (
                log_total == -math.inf and log_err == -math.inf
            ):
                rel = math.exp(log_err - log_total) if log_total > -math.inf else 0.0
                return QuadratureResult(LogValue(log_total), rel, evaluations, True)
            frozen_dominates = (
                log_frozen_err > -math.inf
                and log_heap_err <= log_frozen_err + math.log(0.05)
            )
            stagnant = stagnant + 1 if log_err > last_log_err + math.log(0.99) else 0
            last_log_err = log_err
            if exhausted or frozen_dominates or stagnant >= 5:
                rel = math.exp(log_err - log_total) if log_total > -math.inf else math.inf
                return QuadratureResult(LogValue(log_total), rel, evaluations, False)
            until_check = max(4, len(heap) // 8)
        neg_err, _, a, b, l_v = heapq.heappop(heap)
        until_check -= 1
        if _too_narrow(a, b):
            frozen.append((l_v, -neg_err))
            continue
        mid = 0.5 * (a + b)
        for c, d in ((a, mid), (mid, b)):
            l_hi, l_lo = _panel_log(gc, c, d)
            evaluations += _EVALS_PER_PANEL
            counter += 1
            heapq.heappush(heap, (-_log_abs_diff(l_hi, l_lo), counter, c, d, l_hi))


# --------------------------------------------------------------------------
# 1-D maximisation
# --------------------------------------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def maximize_unimodal(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
) -> tuple[float, float]:
    """Golden-section search for the maximum of a unimodal function.

    Returns ``(argmax, max)`` with the argmax located within ``tol`` of the
    true maximiser, subject to the usual value-resolution limit: once f is
    flat to machine precision around its top (a sqrt(eps) neighbourhood for
    a quadratic maximum) comparisons cannot localise further.  Boundary
    maxima are found as well: the bracket simply collapses onto the
    endpoint.
    """
    if not lo < hi:
        raise ValueError("maximize_unimodal requires lo < hi")
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)
