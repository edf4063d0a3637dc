#!/usr/bin/env python3
import argparse
import json
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from . import __version__
from .counting import (
    DEFAULT_ALPHAS,
    fit_exponent,
    geodesic_count,
    geodesic_histogram,
    orbit_count,
    primitive_classes,
)
from .cover import CoverSpec, HGram, constant_c, invariants
from .errors import ConfigError, LocalMixError
from .fuchsian import GroupPresentation, estimate_ball_nodes, preset
from .fuchsian.presets import PRESETS
from .hyperbolic import PointH2
from .mixing import decay_fit, estimate_work, mixing_series, renormalized_ratio
from .models import EnumerationBudget, SamplingPlan
from .parallel import ENV_THREADS, resolve_threads
from .report import load_document, write_csv, write_json
from .schemas import (
    BoxSpecModel,
    CoverSpecModel,
    ExperimentConfig,
    FitReportModel,
    GroupSpecModel,
    HGramModel,
    InvariantsReport,
    Provenance,
    ShiftSpecModel,
)
from .symbolic import (
    SYSTEMS,
    ShiftSystem,
    Window,
    i_t_direct,
    i_t_unfolded,
    leading_triple,
    llt_series,
    q_sum,
)

_LOGGER = logging.getLogger(__name__)

SYMBOLIC_ACTIONS = ("pressure", "gibbs", "qsum", "it-check", "llt")
IT_TOLERANCE = 1e-8


def _grid(text: str) -> List[float]:
    """``start:stop:step`` (stop included) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [start + k * step for k in range(count)]
        return [float(v) for v in text.split(",")]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from err


def _pair(text: str) -> Tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.replace(":", ",").split(","))
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected two numbers, got {text!r}") from err
    return lo, hi


def _ints(text: str) -> List[int]:
    return [int(v) for v in text.split(",")] if text else []


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(prog="localmix")

    # Sub-commands
    subparsers = parser.add_subparsers(dest="command", help="Command to run")
    subparsers.required = True

    inv_parser = subparsers.add_parser(
        "invariants", help="Cover invariants p, h, m0 and the constant c"
    )
    inv_parser.add_argument(
        "--method",
        default="quadrature",
        choices=["quadrature", "polytope"],
        help="Evaluation of the p-integral (default: quadrature)",
    )

    orbit_parser = subparsers.add_parser(
        "orbit-count", help="Count kernel orbit points in growing balls"
    )
    orbit_parser.add_argument(
        "--x", type=_pair, default=(0.0, 1.0), help="Base point x as 're,im'"
    )
    orbit_parser.add_argument(
        "--y", type=_pair, default=(0.0, 1.0), help="Orbit point y as 're,im'"
    )

    geo_parser = subparsers.add_parser(
        "geodesics", help="Count primitive closed geodesics in one homology class"
    )
    geo_parser.add_argument(
        "--xi", type=_ints, default=None, help="Homology class, e.g. '0,0' (default 0)"
    )
    geo_parser.add_argument(
        "--class-method",
        default="auto",
        choices=["auto", "arithmetic", "ball"],
        help="Conjugacy-class enumeration strategy",
    )
    geo_parser.add_argument(
        "--histogram",
        action="store_true",
        help="Add the per-class histogram at the largest T to the report",
    )

    mix_parser = subparsers.add_parser(
        "matrix-coeff", help="Monte Carlo matrix coefficients of the geodesic flow"
    )
    mix_parser.add_argument(
        "--box-a", required=True, help="Target box as JSON or @file"
    )
    mix_parser.add_argument(
        "--box-b", required=True, help="Source box as JSON or @file"
    )
    mix_parser.add_argument(
        "--samples",
        type=lambda v: int(float(v)),
        default=1_000_000,
        help="Samples per time (default: 1e6)",
    )
    mix_parser.add_argument("--seed", type=int, default=0, help="Random seed")
    mix_parser.add_argument(
        "--batch", type=int, default=65_536, help="Samples per worker batch"
    )
    mix_parser.add_argument(
        "--step", type=float, default=0.5, help="Flow time between reductions"
    )

    sym_parser = subparsers.add_parser(
        "symbolic", help="Transfer operators and path sums on a Markov shift"
    )
    sym_parser.add_argument("action", choices=SYMBOLIC_ACTIONS)
    sym_parser.add_argument(
        "--system",
        default="lazy_walk",
        choices=sorted(SYSTEMS),
        help="Built-in shift (default: lazy_walk)",
    )
    sym_parser.add_argument("--shift-file", help="Shift spec as JSON or @file")
    sym_parser.add_argument("--state", type=int, default=0, help="State x")
    sym_parser.add_argument("--xi", type=_ints, default=None, help="Class in Z^d")
    sym_parser.add_argument("--t", type=float, default=10.0, help="Time t")
    sym_parser.add_argument(
        "--window", default="[[-0.5, 0.5, 1.0]]", help="Window pieces [lo, hi, w]"
    )
    sym_parser.add_argument(
        "--clock", default="roof", choices=["roof", "steps"], help="Time variable"
    )
    sym_parser.add_argument(
        "--m0", type=float, default=1.0, help="Total mass in the correlation"
    )

    group_parsers = [inv_parser, orbit_parser, geo_parser, mix_parser]
    for sub_parser in group_parsers:
        sub_parser.add_argument(
            "--preset",
            default="gamma2",
            choices=sorted(PRESETS),
            help="Built-in group (default: gamma2)",
        )
        sub_parser.add_argument(
            "--group-file", help="Group document as JSON or @file (overrides --preset)"
        )
        sub_parser.add_argument(
            "--phi",
            default="identity",
            help="Cover map: identity, trivial, JSON rows or @file",
        )
    for sub_parser in (inv_parser, mix_parser):
        sub_parser.add_argument("--gram", help="h-norm Gram matrix as JSON or @file")
        sub_parser.add_argument(
            "--exact",
            action="store_true",
            help="Fail instead of omitting the h-factor of c",
        )
    for sub_parser in (orbit_parser, geo_parser, mix_parser, sym_parser):
        sub_parser.add_argument(
            "--t-grid", type=_grid, default=None, help="'start:stop:step' or 'a,b,c'"
        )
    for sub_parser in (orbit_parser, geo_parser, mix_parser):
        sub_parser.add_argument(
            "--fit-window", type=_pair, default=None, help="Fit window 'lo,hi'"
        )
        sub_parser.add_argument(
            "--alphas",
            type=lambda v: [float(a) for a in v.split(",")],
            default=list(DEFAULT_ALPHAS),
            help="Candidate exponents",
        )
    for sub_parser in (orbit_parser, geo_parser):
        sub_parser.add_argument(
            "--node-cap", type=int, default=500_000_000, help="Enumeration budget"
        )
        sub_parser.add_argument(
            "--margin", type=float, default=4.0, help="Ball pruning margin"
        )

    # Common arguments
    for sub_parser in group_parsers + [sym_parser]:
        sub_parser.add_argument(
            "--threads",
            type=int,
            default=None,
            help=f"Worker processes (default: ${ENV_THREADS} or 1)",
        )
        sub_parser.add_argument(
            "--dry-run",
            action="store_true",
            help="Print the resolved configuration and exit",
        )
        sub_parser.add_argument("--out", help="CSV output path (default: stdout)")
        sub_parser.add_argument("--report", help="JSON report path (default: stdout)")
        sub_parser.add_argument(
            "--debug",
            action="store_true",
            help="Log DEBUG messages",
        )
        sub_parser.add_argument(
            "--log-format",
            default=logging.BASIC_FORMAT,
            help="Format for log messages",
        )
        sub_parser.add_argument(
            "--version",
            action="version",
            version=__version__,
            help="Print version and exit",
        )

    return parser.parse_args(argv)


def load_group(args: argparse.Namespace) -> GroupPresentation:
    if args.group_file:
        return GroupSpecModel.model_validate(
            load_document(args.group_file)
        ).to_presentation()
    return preset(args.preset)


def load_cover(args: argparse.Namespace, g: GroupPresentation) -> CoverSpec:
    if args.phi == "identity":
        return CoverSpec.identity(g.rank)
    if args.phi == "trivial":
        return CoverSpec.trivial(g.rank)
    document = load_document(args.phi)
    if isinstance(document, list):
        document = {"phi": document}
    return CoverSpecModel.model_validate(document).to_cover(g.rank)


def load_gram(args: argparse.Namespace) -> Optional[HGram]:
    if not args.gram:
        return None
    document = load_document(args.gram)
    if isinstance(document, list):
        document = {"q": document}
    return HGramModel.model_validate(document).to_gram()


def load_shift(args: argparse.Namespace) -> ShiftSystem:
    if args.shift_file:
        return ShiftSpecModel.model_validate(load_document(args.shift_file)).to_system()
    return SYSTEMS[args.system]()


def _budget(args: argparse.Namespace, t_max: float) -> EnumerationBudget:
    return EnumerationBudget(t_max=t_max, node_cap=args.node_cap, margin=args.margin)


def _require_grid(args: argparse.Namespace) -> List[float]:
    if not args.t_grid:
        raise ConfigError("--t-grid is required")
    return args.t_grid


def _settings(args: argparse.Namespace) -> Dict[str, Any]:
    skip = {"command", "debug", "log_format", "dry_run", "out", "report", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _provenance(
    args: argparse.Namespace,
    g: Optional[GroupPresentation] = None,
    spec: Optional[CoverSpec] = None,
    seed: Optional[int] = None,
) -> Provenance:
    config = ExperimentConfig(
        command=args.command,
        group=g.name if g else None,
        group_hash=g.hash() if g else None,
        phi=[list(row) for row in spec.phi] if spec else None,
        settings=_settings(args),
    )
    return Provenance.for_config(config, seed=seed, threads=args.threads)


def _fit(series, args, predicted: float) -> Optional[Dict[str, Any]]:
    window = args.fit_window or (float(series.t[0]), float(series.t[-1]))
    try:
        report = fit_exponent(series, window, args.alphas, predicted)
    except ConfigError as err:
        _LOGGER.warning("No fit: %s", err)
        return None
    return FitReportModel(**report.to_dict()).model_dump()


def _ball_estimate(
    g: GroupPresentation, radius: float, budget: EnumerationBudget
) -> Dict[str, Any]:
    nodes = estimate_ball_nodes(g, radius, budget)
    if nodes > budget.node_cap:
        _LOGGER.warning(
            "Estimated %.3g nodes exceed the cap of %d", nodes, budget.node_cap
        )
    return {
        "radius": radius,
        "explore_radius": radius + budget.margin,
        "nodes": nodes,
        "node_cap": budget.node_cap,
        "within_cap": nodes <= budget.node_cap,
    }


def _dry_run(provenance: Provenance, estimate: Optional[Dict[str, Any]] = None) -> None:
    """Print the resolved configuration and the estimated work, then stop."""
    document = {"provenance": provenance.model_dump(), "estimate": estimate or {}}
    print(json.dumps(document, indent=2, sort_keys=True, default=str))


def cmd_invariants(args: argparse.Namespace) -> None:
    g = load_group(args)
    spec = load_cover(args, g)
    gram = load_gram(args)
    provenance = _provenance(args, g, spec)
    if args.dry_run:
        _dry_run(provenance)
        return
    inv = invariants(g, spec, method=args.method)
    result = constant_c(inv, gram, exact=args.exact)
    report = InvariantsReport(
        group=g.name,
        d=inv.d,
        p=inv.p,
        h=inv.h,
        m0=inv.m0,
        residues=inv.residues.tolist(),
        basis_ep=inv.basis_ep.tolist(),
        basis_eh=inv.basis_eh.tolist(),
        c=result.c,
        c_exact=result.exact,
        p_factor=result.p_factor,
        h_factor=result.h_factor,
        error=result.error,
        exponent_mixing=inv.predicted_exponent("mixing"),
        exponent_geodesics=inv.predicted_exponent("geodesics"),
    )
    write_json({"invariants": report.model_dump()}, provenance, args.report)


def cmd_orbit_count(args: argparse.Namespace) -> None:
    g = load_group(args)
    spec = load_cover(args, g)
    grid = _require_grid(args)
    provenance = _provenance(args, g, spec)
    budget = _budget(args, max(grid))
    if args.dry_run:
        _dry_run(provenance, _ball_estimate(g, max(grid), budget))
        return
    series = orbit_count(
        g, spec, grid, PointH2(*args.x), PointH2(*args.y), budget, args.threads
    )
    inv = invariants(g, spec)
    write_csv(["t", "count"], series.rows(), provenance, args.out)
    payload = {"series": series.to_dict(), "invariants": inv.to_dict()}
    payload["fit"] = _fit(series, args, inv.predicted_exponent("mixing"))
    if args.report:
        write_json(payload, provenance, args.report)


def cmd_geodesics(args: argparse.Namespace) -> None:
    g = load_group(args)
    spec = load_cover(args, g)
    grid = _require_grid(args)
    xi = args.xi if args.xi is not None else [0] * spec.d
    provenance = _provenance(args, g, spec)
    budget = _budget(args, max(grid))
    if args.dry_run:
        radius = max(grid) + budget.axis_margin
        _dry_run(provenance, _ball_estimate(g, radius, budget))
        return
    classes = primitive_classes(g, max(grid), budget, args.threads, args.class_method)
    series = geodesic_count(g, spec, xi, grid, budget, args.threads, classes)
    inv = invariants(g, spec)
    write_csv(["t", "count"], series.rows(), provenance, args.out)
    payload = {"series": series.to_dict(), "invariants": inv.to_dict()}
    payload["fit"] = _fit(series, args, inv.predicted_exponent("geodesics"))
    if args.histogram:
        histogram = geodesic_histogram(g, spec, max(grid), classes)
        payload["histogram"] = [
            {"xi": list(key), "count": count}
            for key, count in sorted(histogram.items())
        ]
    if args.report:
        write_json(payload, provenance, args.report)


def cmd_matrix_coeff(args: argparse.Namespace) -> None:
    g = load_group(args)
    spec = load_cover(args, g)
    grid = _require_grid(args)
    box_a = BoxSpecModel.model_validate(load_document(args.box_a)).to_box()
    box_b = BoxSpecModel.model_validate(load_document(args.box_b)).to_box()
    plan = SamplingPlan(
        samples=args.samples,
        seed=args.seed,
        threads=args.threads,
        batch=args.batch,
        step=args.step,
    )
    provenance = _provenance(args, g, spec, seed=args.seed)
    if args.dry_run:
        _dry_run(provenance, estimate_work(plan, grid))
        return
    series = mixing_series(g, spec, box_a, box_b, grid, plan)
    write_csv(
        ["t", "estimate", "stderr", "samples", "discarded"],
        series.rows(),
        provenance,
        args.out,
    )
    if not args.report:
        return
    inv = invariants(g, spec)
    alpha = inv.predicted_exponent("mixing")
    result = constant_c(inv, load_gram(args), exact=args.exact)
    payload: Dict[str, Any] = {"series": series.to_dict(), "invariants": inv.to_dict()}
    payload["c"] = result.c
    payload["renormalized"] = renormalized_ratio(
        series, result.c, alpha, box_a, box_b
    ).tolist()
    try:
        window = args.fit_window or (float(min(grid)), float(max(grid)))
        fit = decay_fit(series, args.alphas, window, alpha)
        payload["fit"] = FitReportModel(**fit.to_dict()).model_dump()
    except ConfigError as err:
        _LOGGER.warning("No fit: %s", err)
        payload["fit"] = None
    write_json(payload, provenance, args.report)


def cmd_symbolic(args: argparse.Namespace) -> None:
    system = load_shift(args)
    window = Window.from_dict(load_document(args.window))
    xi = args.xi if args.xi is not None else [0] * system.d
    provenance = _provenance(args)
    if args.dry_run:
        _dry_run(provenance)
        return
    gibbs = leading_triple(system)
    if args.action == "pressure":
        payload = {"lambda": gibbs.lam, "pressure": gibbs.pressure}
    elif args.action == "gibbs":
        payload = {"gibbs": gibbs.to_dict()}
    elif args.action == "qsum":
        value = q_sum(gibbs, args.state, xi, args.t, window, clock=args.clock)
        payload = {"t": args.t, "x": args.state, "xi": xi, "q": value}
    elif args.action == "it-check":
        ones = np.ones(system.size)
        terms = (args.t, args.m0, ones, xi, window, ones, [0] * system.d, window)
        direct = i_t_direct(gibbs, *terms)
        unfolded = i_t_unfolded(gibbs, *terms)
        agree = abs(direct - unfolded) <= IT_TOLERANCE * (1.0 + abs(direct))
        if not agree:
            _LOGGER.warning("Direct %.17g and unfolded %.17g differ", direct, unfolded)
        payload = {"direct": direct, "unfolded": unfolded, "agree": agree}
    else:
        series = llt_series(
            gibbs, args.state, xi, _require_grid(args), window, clock=args.clock
        )
        write_csv(["t", "q", "scaled"], series.rows(), provenance, args.out)
        if not args.report:
            return
        payload = {"llt": series.to_dict()}
    write_json(payload, provenance, args.report)


COMMANDS: Dict[str, Callable[[argparse.Namespace], None]] = {
    "invariants": cmd_invariants,
    "orbit-count": cmd_orbit_count,
    "geodesics": cmd_geodesics,
    "matrix-coeff": cmd_matrix_coeff,
    "symbolic": cmd_symbolic,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Run main entry point; returns the process exit code."""
    args = parse_args(argv)

    # Configure logging
    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.INFO,
        format=args.log_format,
        stream=sys.stderr,
    )
    args.threads = resolve_threads(args.threads)
    _LOGGER.debug("args:\n%s", json.dumps(vars(args), indent=4, sort_keys=True))

    try:
        COMMANDS[args.command](args)
    except ValidationError as err:
        _LOGGER.error("Invalid document: %s", err)
        return ConfigError.exit_code
    except LocalMixError as err:
        _LOGGER.error("%s: %s", type(err).__name__, err)
        return err.exit_code
    except np.linalg.LinAlgError as err:
        _LOGGER.error("Linear algebra failure: %s", err)
        return LocalMixError.exit_code
    return 0


# -----------------------------------------------------------------------------


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    try:
        run()
    except KeyboardInterrupt:
        pass
