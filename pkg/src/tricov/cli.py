"""Command-line interface.

Exit status is 0 on success, 2 on usage errors and 1 on runtime errors.
All randomness is controlled by ``--seed``.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io
from .cv import CVPlan, h_grid, kfold_cv
from .estimator import correlation_surface, estimate, std_curve
from .experiments import (
    bandwidth_sweep,
    clt_check,
    decomposition_study,
    estimator_comparison,
    rate_table,
)
from .grid import lattice_eval_grid, make_equidistant_grid
from .processes import add_noise, make_process
from .rng import RngSpec
from .weights import SmootherConfig

DEFAULT_H_GRID = "0.05:1.0:0.05"


def _h_grid_arg(text: str) -> tuple[float, ...]:
    try:
        a, b, step = (float(v) for v in text.split(":"))
        return h_grid(a, b, step)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP:STEP, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _points(text: str) -> list[tuple[float, float]]:
    try:
        out = []
        for chunk in text.split(";"):
            x, y = (float(v) for v in chunk.split(","))
            out.append((x, y))
        return out
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y;x,y;...', got {text!r}") from None


def _add_process_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--process", choices=["ou", "twoterm", "bm"], default="ou")
    sp.add_argument("--theta", type=float, default=3.0, help="OU mean-reversion rate")
    sp.add_argument("--sigma", type=float, default=2.0, help="OU / Brownian diffusion scale")
    sp.add_argument("--noise-sd", type=float, default=0.75, help="observation noise sd")
    sp.add_argument("--seed", type=int, default=0)


def _add_smoother_args(sp: argparse.ArgumentParser, bandwidth: bool = True) -> None:
    sp.add_argument("--order", type=int, default=1, help="local polynomial order m")
    if bandwidth:
        sp.add_argument("--bandwidth", type=float, required=True)
    sp.add_argument("--kernel", choices=["uniform", "epanechnikov"], default="epanechnikov")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tricov",
        description="Covariance kernel estimation from synchronously observed noisy curves. "
        "Surface files are long CSV 'x,y,value' with x <= y; holes are written as NA.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("estimate", help="smooth the empirical covariance of a sample file")
    sp.add_argument("--input", required=True)
    _add_smoother_args(sp)
    sp.add_argument("--domain", choices=["triangle", "offdiag"], default="triangle")
    sp.add_argument("--grid", default="equidistant", help="'header', 'equidistant' or a grid file")
    sp.add_argument("--lattice", type=int, default=None, help="evaluate on an N x N lattice instead of design pairs")
    sp.add_argument("--out", required=True)
    sp.add_argument("--std-out")
    sp.add_argument("--corr-out")

    sp = sub.add_parser("cv", help="K-fold cross-validated bandwidth")
    sp.add_argument("--input", required=True)
    sp.add_argument("--folds", type=int, default=5)
    sp.add_argument("--h-grid", type=_h_grid_arg, default=DEFAULT_H_GRID)
    _add_smoother_args(sp, bandwidth=False)
    sp.add_argument("--grid", default="equidistant")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("simulate", help="simulate noisy curves on an equidistant grid")
    _add_process_args(sp)
    sp.set_defaults(noise_sd=0.0)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--header", action="store_true", help="write the design points as first row")
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("decompose", help="sup-norms of the error decomposition terms")
    _add_process_args(sp)
    _add_smoother_args(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--reps", type=int, default=100)
    sp.add_argument("--include-indep", action="store_true")
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("sweep", help="sup-norm error over a bandwidth grid")
    _add_process_args(sp)
    _add_smoother_args(sp, bandwidth=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--h-grid", type=_h_grid_arg, default=DEFAULT_H_GRID)
    sp.add_argument("--reps", type=int, default=100)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("rates", help="oracle-bandwidth error versus n")
    _add_process_args(sp)
    _add_smoother_args(sp, bandwidth=False)
    sp.add_argument("--n-list", type=_int_list, default=[100, 400])
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--h-grid", type=_h_grid_arg, default=DEFAULT_H_GRID)
    sp.add_argument("--reps", type=int, default=100)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("compare", help="upper-triangle smoother versus the off-diagonal comparator")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--noise-sd", type=float, default=0.75)
    sp.add_argument("--orders", type=_int_list, default=[0, 1, 2])
    sp.add_argument("--h-grid", type=_h_grid_arg, default=DEFAULT_H_GRID)
    sp.add_argument("--reps", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("clt", help="replication variance of sqrt(n)(estimate - truth)")
    _add_process_args(sp)
    _add_smoother_args(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--points", type=_points, default=_points("0.25,0.75;0.5,0.9"))
    sp.add_argument("--reps", type=int, default=500)
    sp.add_argument("--out", required=True)
    return parser


def _cmd_estimate(args) -> None:
    y, grid = io.read_samples(args.input, args.grid)
    cfg = SmootherConfig(args.order, args.bandwidth, args.kernel, args.domain)
    evals = lattice_eval_grid(args.lattice) if args.lattice else None
    surface = estimate(y, grid, cfg, evals)
    io.write_surface(args.out, surface)
    if len(surface.holes):
        print(f"warning: {len(surface.holes)} evaluation points without usable pairs (written as NA)", file=sys.stderr)
    if args.std_out:
        curve = std_curve(surface)
        io.write_std_curve(args.std_out, curve)
        if curve.n_clamped:
            print(f"warning: {curve.n_clamped} negative variance estimates clamped to 0", file=sys.stderr)
    if args.corr_out:
        io.write_surface(args.corr_out, correlation_surface(surface))


def _cmd_cv(args) -> None:
    y, grid = io.read_samples(args.input, args.grid)
    plan = CVPlan(args.folds, args.h_grid, args.seed)
    rep = kfold_cv(y, grid, SmootherConfig(args.order, args.h_grid[0], args.kernel), plan)
    io.write_cv_report(args.out, rep)
    print(f"chosen h = {rep.chosen_h!r}")


def _cmd_simulate(args) -> None:
    grid = make_equidistant_grid(args.p)
    rng = RngSpec(args.seed)
    proc = make_process(args.process, args.theta, args.sigma)
    y = add_noise(proc.simulate(args.n, grid, rng), args.noise_sd, rng)
    io.write_samples(args.out, y, grid if args.header else None)


def _cmd_decompose(args) -> None:
    proc = make_process(args.process, args.theta, args.sigma)
    cfg = SmootherConfig(args.order, args.bandwidth, args.kernel)
    rep = decomposition_study(proc, args.n, args.p, args.noise_sd, cfg, args.reps, RngSpec(args.seed), args.include_indep)
    io.write_report(args.out, rep)


def _cmd_sweep(args) -> None:
    proc = make_process(args.process, args.theta, args.sigma)
    rep = bandwidth_sweep(proc, args.n, args.p, args.noise_sd, args.order, args.h_grid, args.reps, RngSpec(args.seed))
    io.write_report(args.out, rep)
    print(f"best h = {float(rep.extras['best_h'])!r}")


def _cmd_rates(args) -> None:
    proc = make_process(args.process, args.theta, args.sigma)
    rep = rate_table(proc, args.n_list, args.p, args.noise_sd, args.order, args.reps, RngSpec(args.seed), args.h_grid)
    io.write_report(args.out, rep)
    print(f"slope = {float(rep.extras['slope']):.4f}")


def _cmd_compare(args) -> None:
    rep = estimator_comparison(args.n, args.p, args.noise_sd, args.orders, args.h_grid, args.reps, RngSpec(args.seed))
    io.write_report(args.out, rep)


def _cmd_clt(args) -> None:
    proc = make_process(args.process, args.theta, args.sigma)
    if proc.name == "bm":
        raise ValueError("the CLT check needs a process with a Gaussian closed form (ou or twoterm)")
    rep = clt_check(proc, args.n, args.p, args.bandwidth, args.order, args.points, args.reps,
                    RngSpec(args.seed), args.noise_sd)
    io.write_report(args.out, rep)


_COMMANDS = {
    "estimate": _cmd_estimate,
    "cv": _cmd_cv,
    "simulate": _cmd_simulate,
    "decompose": _cmd_decompose,
    "sweep": _cmd_sweep,
    "rates": _cmd_rates,
    "compare": _cmd_compare,
    "clt": _cmd_clt,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with np.errstate(all="ignore"):
            _COMMANDS[args.command](args)
    except (ValueError, OSError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
