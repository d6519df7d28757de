"""Command-line front end.

Every subcommand writes a CSV table (``#``-prefixed metadata header,
``%.12g`` numbers, ``\\n`` line endings) plus a JSON run manifest at
``<out>.manifest.json`` that records the command line, resolved
parameters, seed and warnings -- enough to re-run the command
bit-identically; the manifest's ``duration_s`` is the only field expected
to differ between reruns.

Grids use ``log:<start>:<stop>:<n>``, ``lin:<start>:<stop>:<n>`` or an
explicit comma list; m-grids are rounded to unique integers.  Exit codes:
0 success, 1 computational failure (e.g. flagged non-convergence),
2 usage error.  ``RISKCURVES_THREADS`` caps the Monte Carlo worker count.
"""

from __future__ import annotations

import argparse
import math
import shlex
import sys
import time

import numpy as np

from . import __version__, classification, corrections, montecarlo, pac_asymptotics, regression
from .curve import RunManifest, write_csv
from .risk_models import BetaRisk, RealisablePerceptron, from_descriptor

__all__ = ["main", "parse_grid", "parse_h"]


class ComputationalError(RuntimeError):
    """Raised for failures that merit exit code 1 rather than 2."""


def parse_grid(text: str) -> np.ndarray:
    """``log:lo:hi:n`` | ``lin:lo:hi:n`` | ``v1,v2,...`` -> float array."""
    text = text.strip()
    if text.startswith(("log:", "lin:")):
        kind, *rest = text.split(":")
        if len(rest) != 3:
            raise ValueError(f"grid {text!r} must be {kind}:<start>:<stop>:<n>")
        start, stop = float(rest[0]), float(rest[1])
        n = int(rest[2])
        if n < 1:
            raise ValueError("grid needs at least one point")
        if kind == "log":
            if start <= 0 or stop <= 0:
                raise ValueError("log grids need positive bounds")
            return np.geomspace(start, stop, n)
        return np.linspace(start, stop, n)
    values = np.asarray([float(v) for v in text.split(",") if v.strip() != ""])
    if values.size == 0:
        raise ValueError("empty grid")
    return values


def _int_grid(values: np.ndarray) -> np.ndarray:
    return np.unique(np.rint(values).astype(int))


def parse_h(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    value = float(text)
    if value < 1:
        raise ValueError("H must be >= 1")
    return value


def _write_outputs(args, columns, metadata, warnings, parameters, started, printed=None):
    write_csv(args.out, columns, metadata)
    manifest = RunManifest(
        command_line=" ".join(shlex.quote(a) for a in sys.argv),
        parameters=parameters,
        seed=getattr(args, "seed", None),
        duration_s=round(time.perf_counter() - started, 6),
        warnings=warnings,
    )
    manifest.write(f"{args.out}.manifest.json")
    if printed:
        print(printed)


def _curve_warnings(metadata: dict) -> list[str]:
    return [metadata["warning"]] if "warning" in metadata else []


def _cmd_beta_risk_curve(args, started):
    m_grid = _int_grid(parse_grid(args.m_grid))
    curve = classification.erm_curve(BetaRisk(args.a, args.b), parse_h(args.H), m_grid)
    params = {"a": args.a, "b": args.b, "H": args.H, "m_grid": [int(m) for m in m_grid]}
    _write_outputs(
        args,
        [("m", curve.x), ("risk", curve.y)],
        curve.metadata,
        _curve_warnings(curve.metadata),
        params,
        started,
    )
    return 0


def _cmd_gamma_precision_curve(args, started):
    H = parse_h(args.H)
    if math.isinf(H):
        raise ValueError("gamma-precision-curve requires finite H")
    m_grid = _int_grid(parse_grid(args.m_grid))
    curve = regression.regression_curve(args.a, H, m_grid)
    params = {"a": args.a, "H": args.H, "m_grid": [int(m) for m in m_grid]}
    _write_outputs(
        args,
        [("m", curve.x), ("risk", curve.y)],
        curve.metadata,
        _curve_warnings(curve.metadata),
        params,
        started,
    )
    return 0


def _cmd_rho(args, started):
    dist = from_descriptor(args.dist)
    r_grid = parse_grid(args.r_grid)
    if np.any(np.diff(r_grid) <= 0):
        raise ValueError("r grid must be strictly increasing")
    density = np.asarray(dist.density(r_grid), dtype=float)
    grid_integral = float(np.trapezoid(density, r_grid))
    metadata = {"model": dist.descriptor(), "grid_integral": f"{grid_integral:.12g}"}
    params = {"dist": args.dist, "r_grid_points": int(r_grid.size)}
    _write_outputs(
        args, [("r", r_grid), ("density", density)], metadata, [], params, started
    )
    return 0


def _cmd_perceptron_curve(args, started):
    m_grid = _int_grid(parse_grid(args.m_grid))
    dist = RealisablePerceptron(args.p)
    if args.variant == "annealed":
        curve = classification.erm_curve(dist, math.inf, m_grid)
        y = curve.y
        warnings = _curve_warnings(curve.metadata)
    elif args.variant == "beta-approx":
        approx = dist.beta_approximation()
        y = approx.a / (approx.a + approx.b + m_grid.astype(float))
        warnings = []
    else:
        y = np.array([corrections.corrected_expected_erm(args.p, int(m)) for m in m_grid])
        warnings = []
    metadata = {"model": dist.descriptor(), "variant": args.variant}
    params = {"p": args.p, "variant": args.variant, "m_grid": [int(m) for m in m_grid]}
    _write_outputs(
        args, [("m", m_grid.astype(float)), ("risk", y)], metadata, warnings, params, started
    )
    return 0


def _cmd_limit_curve(args, started):
    alpha = np.unique(parse_grid(args.alpha_grid))
    annealed = corrections.limit_curve(alpha, "annealed")
    corrected = corrections.limit_curve(alpha, "corrected")
    warnings = _curve_warnings(annealed.metadata) + _curve_warnings(corrected.metadata)
    params = {"alpha_grid_points": int(alpha.size)}
    _write_outputs(
        args,
        [("alpha", alpha), ("annealed", annealed.y), ("corrected", corrected.y)],
        {"model": "perceptron-limit"},
        warnings,
        params,
        started,
    )
    return 0


def _cmd_pac_bound(args, started):
    query = pac_asymptotics.PacQuery(args.a, args.b, args.epsilon, args.delta, args.variant)
    m_star = pac_asymptotics.pac_sample_bound(query)
    metadata = {"variant": args.variant}
    params = {
        "a": args.a,
        "b": args.b,
        "epsilon": args.epsilon,
        "delta": args.delta,
        "variant": args.variant,
    }
    line = f"m_star={m_star:.12g} ceil={math.ceil(m_star)} variant={args.variant}"
    _write_outputs(
        args,
        [("m_star", np.array([m_star])), ("m_ceil", np.array([float(math.ceil(m_star))]))],
        metadata,
        [],
        params,
        started,
        printed=line,
    )
    return 0


def _cmd_mc_validate(args, started):
    m_grid = _int_grid(parse_grid(args.m_grid))
    dist = RealisablePerceptron(args.p)
    mc_mean = np.empty(m_grid.size)
    mc_stderr = np.empty(m_grid.size)
    annealed = np.empty(m_grid.size)
    corrected = np.empty(m_grid.size)
    warnings: list[str] = []
    for i, m in enumerate(m_grid):
        config = montecarlo.McConfig(
            p=args.p,
            m=int(m),
            n_datasets=args.datasets,
            seed=args.seed,
            n_probes=args.n_probes,
            max_rejection_tries=args.max_tries,
        )
        est = montecarlo.estimate_erm_risk(config, method=args.method)
        if est.rejected_datasets:
            warnings.append(f"m={m}: {est.rejected_datasets} datasets exhausted the budget")
        mc_mean[i] = est.mean
        mc_stderr[i] = est.std_error
        annealed[i] = classification.expected_erm_risk(
            classification.ClassificationScenario(dist, int(m), math.inf)
        )
        corrected[i] = corrections.corrected_expected_erm(args.p, int(m))
    params = {
        "p": args.p,
        "m_grid": [int(m) for m in m_grid],
        "datasets": args.datasets,
        "n_probes": args.n_probes,
        "method": args.method,
        "max_tries": args.max_tries,
    }
    _write_outputs(
        args,
        [
            ("m", m_grid.astype(float)),
            ("mc_mean", mc_mean),
            ("mc_stderr", mc_stderr),
            ("annealed", annealed),
            ("corrected", corrected),
        ],
        {"model": dist.descriptor(), "method": args.method, "seed": str(args.seed)},
        warnings,
        params,
        started,
    )
    return 0


def _cmd_fit_attunement(args, started):
    window = (args.window_lo, args.window_hi)
    if args.dist is not None:
        dist = from_descriptor(args.dist)
        fit = pac_asymptotics.fit_attunement(dist.log_density, window, args.points)
        source = args.dist
    else:
        samples = np.loadtxt(args.samples_file, ndmin=1)
        edges = np.geomspace(window[0], window[1], args.points + 1)
        counts, _ = np.histogram(samples, bins=edges)
        widths = np.diff(edges)
        centers = np.sqrt(edges[:-1] * edges[1:])
        keep = counts > 0
        if np.count_nonzero(keep) < 10:
            raise ComputationalError(
                "fewer than 10 occupied bins in the fit window; widen the window "
                "or provide more samples"
            )
        density = counts[keep] / (samples.size * widths[keep])
        slope, intercept = np.polyfit(np.log(centers[keep]), np.log(density), 1)
        fitted = slope * np.log(centers[keep]) + intercept
        residual = float(np.sqrt(np.mean((np.log(density) - fitted) ** 2)))
        fit = pac_asymptotics.PowerLawFit(
            float(slope) + 1.0, math.exp(float(intercept)), window, residual
        )
        source = args.samples_file
    metadata = {"source": source}
    params = {
        "source": source,
        "window": [window[0], window[1]],
        "points": args.points,
    }
    line = (
        f"exponent={fit.exponent:.12g} window=({window[0]:.12g},{window[1]:.12g}) "
        f"residual={fit.residual:.12g}"
    )
    _write_outputs(
        args,
        [
            ("exponent", np.array([fit.exponent])),
            ("leading_coefficient", np.array([fit.leading_coefficient])),
            ("window_lo", np.array([window[0]])),
            ("window_hi", np.array([window[1]])),
            ("residual", np.array([fit.residual])),
        ],
        metadata,
        [],
        params,
        started,
        printed=line,
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskcurves",
        description="Expected ERM generalisation curves from a distribution of risks",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("beta-risk-curve", help="expected ERM risk for a beta risk model")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--H", default="inf", help="hypothesis count, number or 'inf'")
    p.add_argument("--m-grid", default="log:1:100000:40")
    p.add_argument("--out", default="beta-risk-curve.csv")
    p.set_defaults(handler=_cmd_beta_risk_curve)

    p = sub.add_parser("gamma-precision-curve", help="expected ERM risk for the regression model")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--H", required=True, help="finite hypothesis count, e.g. 1e9")
    p.add_argument("--m-grid", default="log:1:100000:40")
    p.add_argument("--out", default="gamma-precision-curve.csv")
    p.set_defaults(handler=_cmd_gamma_precision_curve)

    p = sub.add_parser("rho", help="tabulate a risk density")
    p.add_argument("--dist", required=True, help="e.g. beta:a=100,b=11.1111 | perceptron:p=20")
    p.add_argument("--r-grid", default="lin:0.001:0.999:999")
    p.add_argument("--out", default="rho.csv")
    p.set_defaults(handler=_cmd_rho)

    p = sub.add_parser("perceptron-curve", help="realisable-perceptron learning curves")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m-grid", default="log:1:10000:40")
    p.add_argument(
        "--variant", choices=("annealed", "beta-approx", "corrected"), default="annealed"
    )
    p.add_argument("--out", default="perceptron-curve.csv")
    p.set_defaults(handler=_cmd_perceptron_curve)

    p = sub.add_parser("limit-curve", help="infinite-width limit curves vs alpha = m/p")
    p.add_argument("--alpha-grid", default="log:0.1:1000:60")
    p.add_argument("--out", default="limit-curve.csv")
    p.set_defaults(handler=_cmd_limit_curve)

    p = sub.add_parser("pac-bound", help="sample-size bound m* for the beta risk model")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--variant", choices=pac_asymptotics.PAC_VARIANTS, default="lemma_proof")
    p.add_argument("--out", default="pac-bound.csv")
    p.set_defaults(handler=_cmd_pac_bound)

    p = sub.add_parser("mc-validate", help="Monte Carlo vs annealed and corrected predictions")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m-grid", default="15,30,60")
    p.add_argument("--datasets", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-probes", type=int, default=200000)
    p.add_argument("--max-tries", type=int, default=10**6)
    p.add_argument("--method", choices=("angular", "rejection"), default="angular")
    p.add_argument("--out", default="mc-validate.csv")
    p.set_defaults(handler=_cmd_mc_validate)

    p = sub.add_parser("fit-attunement", help="fit the tail exponent of a risk density")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--dist")
    group.add_argument("--samples-file")
    p.add_argument("--window-lo", type=float, default=1e-4)
    p.add_argument("--window-hi", type=float, default=1e-2)
    p.add_argument("--points", type=int, default=40)
    p.add_argument("--out", default="fit-attunement.csv")
    p.set_defaults(handler=_cmd_fit_attunement)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        return args.handler(args, started)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ComputationalError) as exc:
        print(f"computational failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
