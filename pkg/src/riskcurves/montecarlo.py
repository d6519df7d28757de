"""Simulation oracle: Gibbs-learning perceptron experiments.

Ground truth for the analytic modules.  A dataset is a teacher direction
plus m labelled Gaussian inputs; Gibbs learning draws a hypothesis
uniformly from the version space (the weight vectors classifying every
training example correctly).

Two exactly-equivalent routes to the uniform-version-space law are
provided:

* ``rejection`` -- draw uniform sphere vectors, accept the first consistent
  one.  This is the textbook sampler, but its acceptance probability is
  int (1-r)**m rho(r) dr, which collapses to ~1e-9 by (p, m) = (15, 60);
  it is only usable when that integral is tame.
* ``angular`` -- factor the uniform measure through (theta, u), where
  theta is the angle to the teacher and u the unit direction in the
  teacher's orthogonal complement.  For fixed u the consistent set is
  exactly an interval [0, theta_max(u)] with
  theta_max(u) = pi/2 + min_i arctan((u . y_i x_i) / (w* . y_i x_i)),
  and the sphere measure of that interval is a regularized incomplete
  beta.  Averaging the interval's (mass, risk-weighted mass) over uniform
  u gives a self-normalised estimator of the version-space mean risk whose
  cost is independent of the acceptance probability.  Per-dataset output
  is a consistent ratio estimator (bias O(1/ESS)); the cross-dataset
  standard error uses between-dataset variance and remains valid as-is.

Reproducibility: every dataset index gets its own generator derived from
(seed, index), so results are bit-identical no matter how dataset tasks
are scheduled.  ``RISKCURVES_THREADS`` (or the ``threads`` argument) sets
the worker count; aggregation is an indexed reduction.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from . import corrections
from .numerics import log_beta
from .risk_models import (
    RealisablePerceptron,
    RiskDistribution,
    UnrealisablePerceptron,
    risk_of_angle,
)

__all__ = [
    "Dataset",
    "McConfig",
    "McEstimate",
    "ConsistencyProfile",
    "sample_unit_sphere",
    "generate_dataset",
    "sample_erm_hypothesis",
    "estimate_erm_risk",
    "estimate_consistency_profile",
    "sample_risks",
]

_CHUNK = 200_000


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # (m, p) rows x_mu
    labels: np.ndarray  # (m,) values in {-1, +1}
    teacher: np.ndarray  # (p,) unit norm
    kind: str  # "realisable" | "unrealisable"
    delta: float | None = None

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class McConfig:
    p: int
    m: int
    n_datasets: int
    n_hypotheses_per_dataset: int = 1
    max_rejection_tries: int = 10**6
    seed: int = 0
    n_probes: int = 200_000  # directions per dataset for the angular method
    batch_size: int = 8192

    def __post_init__(self) -> None:
        if min(self.p, self.n_datasets, self.n_hypotheses_per_dataset) < 1:
            raise ValueError("counts must be >= 1")
        if self.m < 0:
            raise ValueError("m must be nonnegative")
        if self.max_rejection_tries < 1 or self.n_probes < 1 or self.batch_size < 1:
            raise ValueError("budgets must be >= 1")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_effective: int
    rejected_datasets: int


@dataclass(frozen=True)
class ConsistencyProfile:
    """Per-risk estimates of the consistency fraction p(r, D) across datasets."""

    r: np.ndarray
    mean_log_p: np.ndarray  # over datasets with at least one success
    var_log_p: np.ndarray
    std_error: np.ndarray
    n_nonzero: np.ndarray
    n_zero_success: np.ndarray
    n_datasets: int
    n_probes: int
    p: int
    m: int


def _rng_for(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    return max(1, int(os.environ.get("RISKCURVES_THREADS", "1")))


def _map_indexed(fn, n: int, threads: int) -> list:
    if threads <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def sample_unit_sphere(p: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the unit sphere in p dimensions (p >= 2)."""
    if p < 2:
        raise ValueError("sample_unit_sphere requires p >= 2")
    while True:
        g = rng.standard_normal(p)
        norm = float(np.linalg.norm(g))
        if norm > 1e-12:
            return g / norm


def generate_dataset(
    kind: str,
    p: int,
    m: int,
    rng: np.random.Generator,
    delta: float | None = None,
) -> Dataset:
    """Teacher plus m labelled examples.

    realisable: x ~ N(0, I), y = sgn(x . w*).  unrealisable: y uniform in
    {-1, +1}, x ~ N(delta y w*, I).  Consumption order of the generator is
    fixed (teacher, then features, then labels), so outputs are a pure
    function of (seed, kind, p, m, delta).
    """
    if kind not in ("realisable", "unrealisable"):
        raise ValueError("kind must be 'realisable' or 'unrealisable'")
    if p < 2 or m < 0:
        raise ValueError("need p >= 2 and m >= 0")
    teacher = sample_unit_sphere(p, rng)
    if kind == "realisable":
        features = rng.standard_normal((m, p))
        margins = features @ teacher
        labels = np.where(margins >= 0.0, 1.0, -1.0)
        return Dataset(features, labels, teacher, kind)
    if delta is None or delta <= 0:
        raise ValueError("unrealisable data needs a positive delta")
    noise = rng.standard_normal((m, p))
    labels = rng.integers(0, 2, size=m) * 2.0 - 1.0
    features = noise + delta * labels[:, None] * teacher
    return Dataset(features, labels, teacher, kind, delta)


def _consistent(dataset: Dataset, W: np.ndarray) -> np.ndarray:
    """Row mask: does each candidate classify every example correctly?"""
    if dataset.m == 0:
        return np.ones(W.shape[0], dtype=bool)
    signed = dataset.labels[None, :] * (W @ dataset.features.T)
    return np.all(signed > 0.0, axis=1)


def sample_erm_hypothesis(
    dataset: Dataset,
    rng: np.random.Generator,
    max_tries: int = 10**6,
    batch_size: int = 8192,
) -> tuple[np.ndarray | None, int]:
    """Uniform version-space draw by rejection from the uniform sphere.

    Returns ``(w, tries)`` for the first consistent candidate in draw
    order, or ``(None, max_tries)`` when the budget is exhausted.  Keeping
    acceptance in draw order makes the result identical to one-at-a-time
    rejection on the same generator stream.
    """
    if dataset.kind != "realisable":
        raise ValueError("rejection sampling requires a realisable dataset")
    tried = 0
    while tried < max_tries:
        nb = min(batch_size, max_tries - tried)
        W = rng.standard_normal((nb, dataset.p))
        norms = np.maximum(np.linalg.norm(W, axis=1), 1e-300)
        W /= norms[:, None]
        ok = _consistent(dataset, W)
        hit = int(np.argmax(ok)) if np.any(ok) else -1
        if hit >= 0:
            return W[hit], tried + hit + 1
        tried += nb
    return None, max_tries


def _feasible_angle_stats(
    dataset: Dataset,
    rng: np.random.Generator,
    n: int,
    collector,
    chunk: int = _CHUNK,
) -> None:
    """Stream theta_max(u) over n uniform directions u orthogonal to the
    teacher, feeding each chunk's angles to ``collector``."""
    w_star = dataset.teacher
    if dataset.m > 0:
        A = dataset.labels[:, None] * dataset.features  # (m, p)
        a = A @ w_star  # positive for realisable data
    done = 0
    while done < n:
        nc = min(chunk, n - done)
        U = rng.standard_normal((nc, dataset.p))
        U -= np.outer(U @ w_star, w_star)
        norms = np.maximum(np.linalg.norm(U, axis=1), 1e-300)
        U /= norms[:, None]
        if dataset.m == 0:
            theta_max = np.full(nc, math.pi)
        else:
            q = (U @ A.T) / a[None, :]
            theta_max = 0.5 * math.pi + np.arctan(q.min(axis=1))
        collector(theta_max)
        done += nc


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _angular_dataset_mean_risk(
    dataset: Dataset, rng: np.random.Generator, n_probes: int
) -> tuple[float, float]:
    """(version-space mean risk, effective sample size) for one dataset.

    Directions are weighted by the sphere mass of their feasible-angle
    interval, zeta(u) = I_s((p-1)/2, (p-1)/2) at s = (1 - cos theta_max)/2;
    the per-direction risk contribution integrates (theta/pi) against the
    angle density over [0, theta_max].
    """
    p = dataset.p
    h = (p - 1) / 2.0
    norm = math.exp(log_beta(0.5, h))
    sums = {"zeta": 0.0, "zeta_sq": 0.0, "weighted_risk": 0.0}

    def collect(theta_max: np.ndarray) -> None:
        s = 0.5 * (1.0 - np.cos(theta_max))
        zeta = betainc(h, h, np.clip(s, 0.0, 1.0))
        theta = 0.5 * theta_max[:, None] * (_GL_NODES[None, :] + 1.0)
        vals = (theta / math.pi) * np.sin(theta) ** (p - 2)
        mass_risk = (0.5 * theta_max) * (vals @ _GL_WEIGHTS) / norm
        sums["zeta"] += float(zeta.sum())
        sums["zeta_sq"] += float((zeta * zeta).sum())
        sums["weighted_risk"] += float(mass_risk.sum())

    _feasible_angle_stats(dataset, rng, n_probes, collect)
    if sums["zeta"] <= 0.0:
        return math.nan, 0.0
    ess = sums["zeta"] ** 2 / sums["zeta_sq"] if sums["zeta_sq"] > 0 else 0.0
    return sums["weighted_risk"] / sums["zeta"], ess


def _risk_from_hypothesis(w: np.ndarray, teacher: np.ndarray) -> float:
    return math.acos(float(np.clip(w @ teacher, -1.0, 1.0))) / math.pi


def estimate_erm_risk(
    config: McConfig, method: str = "angular", threads: int | None = None
) -> McEstimate:
    """Mean Gibbs-learning risk over independent datasets.

    ``method="rejection"`` follows the literal rejection sampler and counts
    datasets whose budget was exhausted (excluding them from the mean, so
    large version spaces are not silently favoured).  ``method="angular"``
    is the exact angular-decomposition estimator described in the module
    docstring; it never exhausts.  Standard errors come from the
    between-dataset variance either way.
    """
    if method not in ("angular", "rejection"):
        raise ValueError("method must be 'angular' or 'rejection'")

    def run_dataset(index: int) -> tuple[float, float]:
        rng = _rng_for(config.seed, index)
        dataset = generate_dataset("realisable", config.p, config.m, rng)
        if method == "angular":
            return _angular_dataset_mean_risk(dataset, rng, config.n_probes)
        risks = []
        for _ in range(config.n_hypotheses_per_dataset):
            w, _tries = sample_erm_hypothesis(
                dataset, rng, config.max_rejection_tries, config.batch_size
            )
            if w is None:
                break
            risks.append(_risk_from_hypothesis(w, dataset.teacher))
        if not risks:
            return math.nan, 0.0
        return float(np.mean(risks)), float(len(risks))

    results = _map_indexed(run_dataset, config.n_datasets, _threads(threads))
    means = np.array([r[0] for r in results])
    weights = np.array([r[1] for r in results])
    kept = ~np.isnan(means)
    rejected = int(np.count_nonzero(~kept))
    if not np.any(kept):
        raise ArithmeticError("all datasets exhausted their sampling budget")
    mean = float(np.mean(means[kept]))
    n_kept = int(np.count_nonzero(kept))
    std_error = (
        float(np.std(means[kept], ddof=1) / math.sqrt(n_kept)) if n_kept > 1 else math.inf
    )
    return McEstimate(mean, std_error, int(round(float(weights[kept].sum()))), rejected)


def estimate_consistency_profile(
    p: int,
    m: int,
    r_grid,
    n_datasets: int,
    n_probes: int,
    seed: int = 0,
    threads: int | None = None,
) -> ConsistencyProfile:
    """Empirical mean and variance of ln p(r, D) across datasets.

    p(r, D) is probed at exact risk r by pointing hypotheses
    w = cos(pi r) w* + sin(pi r) u at uniform orthogonal directions u; a
    probe counts as a success when it classifies every example, i.e. when
    pi r < theta_max(u).  Datasets with zero successes at some r are
    excluded from that r's mean and reported separately.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.size == 0 or np.any(r_grid <= 0) or np.any(r_grid > 0.5):
        raise ValueError("r_grid must lie in (0, 0.5]")
    if n_datasets < 2 or n_probes < 1:
        raise ValueError("need at least two datasets and one probe")
    expected = n_probes * np.exp(corrections.log_p_hat(r_grid, m))
    if np.any(expected < 1.0):
        warnings.warn(
            "fewer than one success expected at some risks; "
            "increase n_probes for usable ln p estimates",
            stacklevel=2,
        )
    thresholds = math.pi * r_grid

    def run_dataset(index: int) -> np.ndarray:
        rng = _rng_for(seed, index)
        dataset = generate_dataset("realisable", p, m, rng)
        counts = np.zeros(r_grid.size, dtype=np.int64)

        def collect(theta_max: np.ndarray) -> None:
            nonlocal counts
            counts = counts + (theta_max[:, None] > thresholds[None, :]).sum(axis=0)

        _feasible_angle_stats(dataset, rng, n_probes, collect)
        return counts

    counts = np.vstack(_map_indexed(run_dataset, n_datasets, _threads(threads)))
    mean_log = np.empty(r_grid.size)
    var_log = np.empty(r_grid.size)
    std_err = np.empty(r_grid.size)
    n_nonzero = np.empty(r_grid.size, dtype=int)
    for j in range(r_grid.size):
        nonzero = counts[:, j] > 0
        n_nonzero[j] = int(np.count_nonzero(nonzero))
        if n_nonzero[j] >= 2:
            log_p = np.log(counts[nonzero, j] / n_probes)
            mean_log[j] = float(np.mean(log_p))
            var_log[j] = float(np.var(log_p, ddof=1))
            std_err[j] = math.sqrt(var_log[j] / n_nonzero[j])
        else:
            mean_log[j] = math.nan
            var_log[j] = math.nan
            std_err[j] = math.nan
    return ConsistencyProfile(
        r=r_grid,
        mean_log_p=mean_log,
        var_log_p=var_log,
        std_error=std_err,
        n_nonzero=n_nonzero,
        n_zero_success=n_datasets - n_nonzero,
        n_datasets=n_datasets,
        n_probes=n_probes,
        p=p,
        m=m,
    )


def sample_risks(dist: RiskDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """n risk samples generated through uniformly drawn weight vectors.

    Only the perceptron families support this: the risk is a deterministic
    function of the angle between a uniform sphere vector and the teacher.
    """
    if not isinstance(dist, (RealisablePerceptron, UnrealisablePerceptron)):
        raise TypeError("sample_risks supports only the perceptron families")
    if n < 1:
        raise ValueError("n must be >= 1")
    W = rng.standard_normal((n, dist.p))
    norms = np.maximum(np.linalg.norm(W, axis=1), 1e-300)
    cos_theta = np.clip(W[:, 0] / norms, -1.0, 1.0)  # teacher = e1 w.l.o.g.
    theta = np.arccos(cos_theta)
    return np.asarray(risk_of_angle(theta, dist))
