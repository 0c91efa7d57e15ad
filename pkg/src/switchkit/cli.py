"""Batch command-line front end.

Verbs: simulate, estimate, expected-value, covariance, gd-check, recover,
iia, figure1.  Every verb writes its declared CSV/SVG outputs and prints a
JSON summary to stdout.  Exit codes: 0 success, 1 validation failure,
2 numeric failure, 64 usage error.  The environment variable SWITCHKIT_SEED,
when set, overrides --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import iia as iia_mod
from .distributions import parse_distribution
from .divisibility import gd_check
from .errors import (
    DomainError,
    InvalidArgumentError,
    NumericError,
    ResourceLimitError,
    SwitchKitError,
)
from .grid import GridFunction, GridSpec
from .laplace import CMConfig, invert_laplace
from .recovery import (
    covariance_from_expected,
    divisor_from_covariance,
    divisor_from_expected,
    expected_value_series,
    switching_law_from_divisor,
)
from .simulation import estimate_covariance, estimate_expected_value, simulate_switch
from .svgplot import Panel, render_panels

USAGE_EXIT = 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_grid_args(p, t_end_default=5.0, h_default=1e-3):
    p.add_argument("--t-end", type=float, default=t_end_default, help="grid end time")
    p.add_argument("--h", type=float, default=h_default, help="grid step")


def _add_seed_arg(p):
    p.add_argument("--seed", type=int, default=0,
                   help="64-bit seed (SWITCHKIT_SEED overrides)")


def build_parser() -> _Parser:
    parser = _Parser(prog="switchkit", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("simulate", help="draw one switch-process path")
    p.add_argument("--dist", required=True)
    p.add_argument("--horizon", type=float, default=10.0)
    _add_seed_arg(p)
    p.add_argument("--out", default="epochs.csv")
    p.add_argument("--plot", default=None, help="optional SVG of the sample path")

    p = sub.add_parser("estimate", help="Monte Carlo estimate of E(t) or C(t)")
    p.add_argument("--dist", required=True)
    p.add_argument("--target", choices=["expected", "covariance"], default="expected")
    _add_grid_args(p, t_end_default=4.0, h_default=0.5)
    p.add_argument("--n-paths", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    _add_seed_arg(p)
    p.add_argument("--out", default="estimate.csv")
    p.add_argument("--plot", default=None)

    p = sub.add_parser("expected-value", help="series E(t) from a switching law")
    p.add_argument("--dist", required=True)
    _add_grid_args(p)
    p.add_argument("--tol", type=float, default=1e-6, help="series truncation tolerance")
    p.add_argument("--out", default="expected_value.csv")

    p = sub.add_parser("covariance", help="stationary covariance C(t) from a switching law")
    p.add_argument("--dist", required=True)
    _add_grid_args(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", default="covariance.csv")

    p = sub.add_parser("gd-check", help="r-geometric divisibility screen")
    p.add_argument("--dist", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--cm-max-order", type=int, default=6)
    p.add_argument("--cm-tol", type=float, default=1e-7)

    p = sub.add_parser("recover", help="divisor recovery from a tabulated E or C")
    p.add_argument("--from", dest="source", choices=["expected", "covariance"], required=True)
    p.add_argument("--input", required=True, help="t,value CSV of E(t) or C(t)")
    p.add_argument("--mu", type=float, default=None,
                   help="switching-time mean (expected route only; covariance derives it)")
    p.add_argument("--out-prefix", default="recovered")
    p.add_argument("--compound-pdf-out", default=None,
                   help="also tabulate the compound density by transform inversion")
    p.add_argument("--talbot-nodes", type=int, default=64)

    p = sub.add_parser("iia", help="clipped-Gaussian admissibility screen and recovery")
    p.add_argument("--r", required=True,
                   help="builtin name (diffusion2d, exp, damped-cosine) or a t,value CSV")
    _add_grid_args(p, t_end_default=40.0)
    p.add_argument("--out-prefix", default="iia")
    p.add_argument("--plot", default=None)

    p = sub.add_parser("figure1", help="sample path, E(t) and C(t) panels as SVG")
    p.add_argument("--dist", required=True)
    _add_grid_args(p, t_end_default=20.0, h_default=1e-2)
    _add_seed_arg(p)
    p.add_argument("--out", default="figure1.svg")

    return parser


def _resolve_seed(args) -> int:
    env = os.environ.get("SWITCHKIT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise InvalidArgumentError(f"SWITCHKIT_SEED must be an integer, got {env!r}") from exc
    return getattr(args, "seed", 0)


def _emit(summary: dict) -> None:
    print(json.dumps(summary, sort_keys=True))


def _figure_panels(dist, traj, t_end: float) -> list:
    grid = GridSpec.from_t_end(t_end, max(t_end / 2000.0, 1e-4))
    E = expected_value_series(dist, grid)
    C = covariance_from_expected(E, dist.mean)
    xs, ys = traj.step_points(t_end)
    t = grid.times()
    return [
        Panel(title="sample path").add(xs, ys, "X(t)"),
        Panel(title="expected value").add(t, E.values, "E(t)"),
        Panel(title="stationary covariance").add(t, C.values, "C(t)"),
    ]


def _cmd_simulate(args) -> dict:
    dist = parse_distribution(args.dist)
    traj = simulate_switch(dist, args.horizon, _resolve_seed(args))
    with open(args.out, "w") as fh:
        fh.write("epoch\n")
        for e in traj.epochs:
            fh.write(f"{e:.17e}\n")
    outputs = [args.out]
    if args.plot:
        render_panels(_figure_panels(dist, traj, args.horizon), args.plot)
        outputs.append(args.plot)
    return {
        "verb": "simulate",
        "dist": dist.name,
        "n_epochs": int(len(traj.epochs)),
        "horizon": args.horizon,
        "initial_sign": traj.initial_sign,
        "outputs": outputs,
    }


def _cmd_estimate(args) -> dict:
    dist = parse_distribution(args.dist)
    grid = GridSpec.from_t_end(args.t_end, args.h)
    seed = _resolve_seed(args)
    if args.target == "expected":
        mean, stderr = estimate_expected_value(dist, grid, args.n_paths, seed,
                                               workers=args.workers)
    else:
        mean, stderr = estimate_covariance(dist, grid, args.n_paths, seed,
                                           workers=args.workers)
    mean.to_csv(args.out, extra_columns={"stderr": stderr.values})
    outputs = [args.out]
    if args.plot:
        _cmd_estimate_plot(mean, stderr, args.target, args.plot)
        outputs.append(args.plot)
    return {
        "verb": "estimate",
        "target": args.target,
        "dist": dist.name,
        "n_paths": args.n_paths,
        "seed": seed,
        "outputs": outputs,
    }


def _cmd_expected_value(args) -> dict:
    dist = parse_distribution(args.dist)
    grid = GridSpec.from_t_end(args.t_end, args.h)
    E = expected_value_series(dist, grid, tol=args.tol)
    E.to_csv(args.out)
    return {"verb": "expected-value", "dist": dist.name, "outputs": [args.out],
            "notes": list(E.notes)}


def _cmd_covariance(args) -> dict:
    dist = parse_distribution(args.dist)
    grid = GridSpec.from_t_end(args.t_end, args.h)
    E = expected_value_series(dist, grid, tol=args.tol)
    C = covariance_from_expected(E, dist.mean)
    C.to_csv(args.out)
    return {"verb": "covariance", "dist": dist.name, "mu": dist.mean,
            "outputs": [args.out], "notes": list(C.notes)}


def _cmd_gd_check(args) -> dict:
    dist = parse_distribution(args.dist)
    cfg = CMConfig(max_order=args.cm_max_order, tol=args.cm_tol)
    report = gd_check(dist, args.r, cfg=cfg)
    return {"verb": "gd-check", "dist": dist.name, **report.to_json_dict()}


def _cmd_recover(args) -> dict:
    table = GridFunction.from_csv(args.input)
    if args.source == "expected":
        divisor_cdf, divisor_pdf = divisor_from_expected(table)
        mu = args.mu
    else:
        mu, divisor_cdf, divisor_pdf = divisor_from_covariance(table)
    cdf_path = f"{args.out_prefix}_divisor_cdf.csv"
    pdf_path = f"{args.out_prefix}_divisor_pdf.csv"
    divisor_cdf.to_csv(cdf_path)
    divisor_pdf.to_csv(pdf_path)
    outputs = [cdf_path, pdf_path]
    summary = {"verb": "recover", "from": args.source, "mu": mu, "outputs": outputs}
    if args.compound_pdf_out:
        from .distributions import make_tabulated

        # approximate preview: stride the divisor table so each contour
        # node costs a bounded quadrature, and invert on a coarse grid
        stride = max(1, (len(divisor_pdf) - 1) // 2000)
        coarse = GridFunction(t0=0.0, h=divisor_pdf.h * stride,
                              values=divisor_pdf.values[::stride])
        compound = switching_law_from_divisor(make_tabulated(coarse))
        n_inv = min(max(table.spec().n // 10, 8), 200)
        h_inv = table.t_end / n_inv
        inv_grid = GridSpec(h=h_inv, n=n_inv, t0=h_inv)
        approx = invert_laplace(compound.laplace, inv_grid, nodes=args.talbot_nodes)
        approx.to_csv(args.compound_pdf_out)
        outputs.append(args.compound_pdf_out)
        summary["compound_pdf"] = {
            "path": args.compound_pdf_out,
            "approximate": True,
            "talbot_nodes": args.talbot_nodes,
        }
    return summary


_BUILTIN_COVARIANCES = {
    "diffusion2d": iia_mod.diffusion2d_covariance,
    "exp": iia_mod.exponential_covariance,
    "damped-cosine": iia_mod.damped_cosine_covariance,
}


def _cmd_iia(args) -> dict:
    if args.r in _BUILTIN_COVARIANCES:
        r = _BUILTIN_COVARIANCES[args.r]()
    else:
        r = iia_mod.tabulated_covariance(GridFunction.from_csv(args.r))
    grid = GridSpec.from_t_end(args.t_end, args.h)
    result = iia_mod.iia_pipeline(r, grid)
    summary = {
        "verb": "iia",
        "r": r.name or args.r,
        "screen": result.screen.to_json_dict(),
        "admissible": result.screen.passed,
        "outputs": [],
    }
    if result.screen.passed:
        cdf_path = f"{args.out_prefix}_divisor_cdf.csv"
        pdf_path = f"{args.out_prefix}_divisor_pdf.csv"
        clip_path = f"{args.out_prefix}_clipped_covariance.csv"
        result.divisor_cdf.to_csv(cdf_path)
        result.divisor_pdf.to_csv(pdf_path)
        clipped = iia_mod.clip_covariance(r, grid)
        clipped.to_csv(clip_path)
        summary["mu"] = result.mu
        summary["outputs"] = [cdf_path, pdf_path, clip_path]
        if args.plot:
            t = grid.times()
            panels = [
                Panel(title="clipped covariance").add(t, clipped.values, "C"),
                Panel(title="divisor CDF").add(t, result.divisor_cdf.values, "CDF"),
                Panel(title="divisor density").add(t, result.divisor_pdf.values, "pdf"),
            ]
            render_panels(panels, args.plot)
            summary["outputs"].append(args.plot)
    return summary


def _cmd_figure1(args) -> dict:
    dist = parse_distribution(args.dist)
    grid = GridSpec.from_t_end(args.t_end, args.h)
    seed = _resolve_seed(args)
    traj = simulate_switch(dist, args.t_end, seed)
    E = expected_value_series(dist, grid)
    C = covariance_from_expected(E, dist.mean)
    xs, ys = traj.step_points(args.t_end)
    t = grid.times()
    panels = [
        Panel(title="sample path").add(xs, ys, "X(t)"),
        Panel(title="expected value").add(t, E.values, "E(t)"),
        Panel(title="stationary covariance").add(t, C.values, "C(t)"),
    ]
    render_panels(panels, args.out)
    return {"verb": "figure1", "dist": dist.name, "seed": seed, "outputs": [args.out]}


def _cmd_estimate_plot(mean, stderr, target: str, path) -> None:
    t = mean.times()
    panel = Panel(title=f"MC {target} (4 stderr band)")
    panel.add(t, mean.values, "estimate")
    panel.add(t, mean.values + 4 * stderr.values, "")
    panel.add(t, mean.values - 4 * stderr.values, "")
    render_panels([panel], path)


_DISPATCH = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "expected-value": _cmd_expected_value,
    "covariance": _cmd_covariance,
    "gd-check": _cmd_gd_check,
    "recover": _cmd_recover,
    "iia": _cmd_iia,
    "figure1": _cmd_figure1,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return USAGE_EXIT
    try:
        summary = _DISPATCH[args.verb](args)
    except (InvalidArgumentError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericError, ResourceLimitError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SwitchKitError as exc:  # any future subclasses default to numeric
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    _emit(summary)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
