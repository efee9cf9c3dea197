"""Monte Carlo studies of the estimator.

Every study is a deterministic function of its arguments and the master
``RngSpec``: replication ``r`` draws from substream ``(REPLICATION, r)``,
so results do not depend on evaluation order.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .estimator import CovarianceSurface, empirical_covariance
from .grid import DesignGrid, TriangleGrid, make_equidistant_grid, triangle_eval_grid
from .processes import OUProcess, ProcessSpec, TwoTermProcess, gaussian_fourth_moment
from .rng import NOISE, REPLICATION, RngSpec
from .weights import PairDomain, SmootherConfig, WeightField, compute_weight_field

__all__ = [
    "HoleError",
    "DecompositionError",
    "ReportRow",
    "ExperimentReport",
    "sup_error",
    "simulate_covariances",
    "bandwidth_sweep",
    "decomposition_study",
    "estimator_comparison",
    "clt_check",
    "rate_table",
]

IDENTITY_TOL = 1e-9


class HoleError(RuntimeError):
    """Raised when a sup-norm is requested on a surface with holes."""


class DecompositionError(RuntimeError):
    """The smoothed error terms do not add up to the total error."""


class ReportRow(NamedTuple):
    experiment: str
    n: int
    p: int
    h: float
    m: int
    replication: int
    metric: str
    value: float


@dataclass
class ExperimentReport:
    """Long-format results.

    ``rows`` hold one value per (configuration, replication, metric);
    ``summary`` rows carry ``replication = -1`` and aggregate metrics such as
    ``sup_error_mean``. ``extras`` keeps derived scalars (chosen bandwidths,
    slopes) for programmatic use.
    """

    rows: list[ReportRow] = field(default_factory=list)
    summary: list[ReportRow] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def add(self, experiment, n, p, h, m, replication, metric, value) -> None:
        self.rows.append(ReportRow(experiment, int(n), int(p), float(h), int(m), int(replication), metric, float(value)))

    def add_summary(self, experiment, n, p, h, m, metric, value) -> None:
        self.summary.append(ReportRow(experiment, int(n), int(p), float(h), int(m), -1, metric, float(value)))

    def all_rows(self) -> list[ReportRow]:
        return self.rows + self.summary

    def select(self, metric: str, summary: bool = False, **match) -> list[ReportRow]:
        src = self.summary if summary else self.rows
        return [r for r in src if r.metric == metric and all(getattr(r, k) == v for k, v in match.items())]

    def values(self, metric: str, summary: bool = False, **match) -> np.ndarray:
        return np.array([r.value for r in self.select(metric, summary, **match)])

    def extend(self, other: ExperimentReport) -> None:
        self.rows.extend(other.rows)
        self.summary.extend(other.summary)
        self.extras.update(other.extras)


def _truth_at(truth, evals: TriangleGrid) -> np.ndarray:
    if callable(truth):
        return np.asarray(truth(evals.x, evals.y), dtype=float)
    return np.asarray(truth, dtype=float)


def sup_error(surface: CovarianceSurface, truth) -> float:
    """``max |hat Gamma - Gamma|`` over the evaluation points.

    ``truth`` is a kernel ``f(x, y)`` or an array aligned with the points.
    """
    if len(surface.holes):
        locs = surface.evals.pairs[surface.holes]
        raise HoleError(f"surface has {len(locs)} holes, first at {tuple(locs[0])}")
    return float(np.max(np.abs(surface.values - _truth_at(truth, surface.evals))))


def _draw(process: ProcessSpec, n: int, grid: DesignGrid, noise_sd: float, rr: RngSpec):
    z = process.simulate(n, grid, rr)
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    eps = noise_sd * rr.curve_normals(NOISE, n, grid.p) if noise_sd > 0 else np.zeros_like(z)
    return z, eps


def simulate_covariances(
    process: ProcessSpec, n: int, grid: DesignGrid, noise_sd: float, reps: int, rng: RngSpec
) -> np.ndarray:
    """Empirical covariance matrices ``(reps, p, p)`` of noisy simulated samples."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    out = np.empty((reps, grid.p, grid.p))
    for r in range(reps):
        z, eps = _draw(process, n, grid, noise_sd, rng.child(REPLICATION, r))
        out[r] = empirical_covariance(z + eps).z
    return out


def _sup_errors(fld: WeightField, zs: np.ndarray, truth: np.ndarray) -> np.ndarray:
    if fld.holes.size:
        return np.full(zs.shape[0], np.inf)
    est = fld.apply(fld.pair_values(zs))
    return np.max(np.abs(est - truth[:, None]), axis=0)


def _sweep_errors(grid, zs, truth_fn, m, h_grid, domain=PairDomain.UPPER_TRIANGLE, kernel=None):
    evals = triangle_eval_grid(grid)
    truth = _truth_at(truth_fn, evals)
    errs = np.empty((len(h_grid), zs.shape[0]))
    for c, h in enumerate(h_grid):
        kw = {} if kernel is None else {"kernel": kernel}
        cfg = SmootherConfig(m, h, pair_domain=domain, **kw)
        errs[c] = _sup_errors(compute_weight_field(grid, cfg, evals, cache=False), zs, truth)
    return errs


def _summarise_sweep(report, name, n, p, m, h_grid, errs) -> int:
    reps = errs.shape[1]
    for c, h in enumerate(h_grid):
        for r in range(reps):
            report.add(name, n, p, h, m, r, "sup_error", errs[c, r])
        finite = np.isfinite(errs[c])
        mean = errs[c].mean() if finite.all() else np.inf
        se = errs[c].std(ddof=1) / np.sqrt(reps) if finite.all() and reps > 1 else np.nan
        report.add_summary(name, n, p, h, m, "sup_error_mean", mean)
        report.add_summary(name, n, p, h, m, "sup_error_se", se)
    best_rep = np.argmin(errs, axis=0)
    for r in range(reps):
        report.add(name, n, p, np.nan, m, r, "argmin_h", h_grid[best_rep[r]])
    means = np.where(np.isfinite(errs).all(axis=1), errs.mean(axis=1), np.inf)
    best = int(np.argmin(means))
    report.add_summary(name, n, p, h_grid[best], m, "best_h", h_grid[best])
    report.add_summary(name, n, p, h_grid[best], m, "best_sup_error_mean", means[best])
    return best


def bandwidth_sweep(
    process: ProcessSpec,
    n: int,
    p: int,
    noise_sd: float,
    m: int,
    h_grid: Sequence[float],
    reps: int,
    rng: RngSpec,
    grid: DesignGrid | None = None,
) -> ExperimentReport:
    """Sup-norm error of the estimator per bandwidth and replication.

    Bandwidths whose weight field has holes are scored ``inf``.
    """
    grid = make_equidistant_grid(p) if grid is None else grid
    h_grid = tuple(float(h) for h in h_grid)
    zs = simulate_covariances(process, n, grid, noise_sd, reps, rng)
    errs = _sweep_errors(grid, zs, process.kernel, m, h_grid)
    report = ExperimentReport()
    best = _summarise_sweep(report, "sweep", n, grid.p, m, h_grid, errs)
    report.extras.update(
        best_h=h_grid[best],
        mean_curve=np.where(np.isfinite(errs).all(axis=1), errs.mean(axis=1), np.inf),
        errors=errs,
        h_grid=h_grid,
    )
    return report


def _pair_terms(z: np.ndarray, eps: np.ndarray, gamma_design: np.ndarray) -> dict[str, np.ndarray]:
    n = z.shape[0]
    sz, se = z.sum(axis=0), eps.sum(axis=0)
    zz, ee = z.T @ z, eps.T @ eps
    ze, ez = z.T @ eps, eps.T @ z
    indep = (
        (np.outer(se, se) - ee)
        + (np.outer(sz, sz) - zz)
        + (np.outer(sz, se) - ze)
        + (np.outer(se, sz) - ez)
    ) / (n * (n - 1))
    return {
        "eps": ee / n,
        "prc": zz / n - gamma_design,
        "mix": (ze + ez) / n,
        "indep": indep,
    }


def decomposition_study(
    process: ProcessSpec,
    n: int,
    p: int,
    noise_sd: float,
    cfg: SmootherConfig,
    reps: int,
    rng: RngSpec,
    include_indep: bool = False,
    grid: DesignGrid | None = None,
) -> ExperimentReport:
    """Sup-norms of the smoothed error components per replication.

    Metrics: ``dsc`` (discretisation bias), ``eps`` (noise products), ``mix``
    (process times noise), ``prc`` (process fluctuation) and ``sup`` (total
    error). The cross-replication remainder ``indep`` is always computed to
    check ``eps + dsc + prc + mix - indep == total`` and is reported only
    with ``include_indep``. The check residual is reported as ``residual``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    grid = make_equidistant_grid(p) if grid is None else grid
    evals = triangle_eval_grid(grid)
    fld = compute_weight_field(grid, cfg, evals)
    if fld.holes.size:
        raise HoleError(f"weight field has {fld.holes.size} holes at h={cfg.bandwidth}")
    xg = grid.points
    gamma_design = process.kernel(xg[:, None], xg[None, :])
    gamma_eval = _truth_at(process.kernel, evals)
    rowsum = np.asarray(fld.matrix.sum(axis=1)).ravel()
    dsc = fld.apply(fld.pair_values(gamma_design)) - gamma_eval * rowsum

    report = ExperimentReport()
    name = "decomposition"
    h, m = cfg.bandwidth, cfg.order
    for r in range(reps):
        z, eps = _draw(process, n, grid, noise_sd, rng.child(REPLICATION, r))
        terms = {k: fld.apply(fld.pair_values(v)) for k, v in _pair_terms(z, eps, gamma_design).items()}
        total = fld.apply(fld.pair_values(empirical_covariance(z + eps).z)) - gamma_eval
        resid = np.max(np.abs(terms["eps"] + dsc + terms["prc"] + terms["mix"] - terms["indep"] - total))
        if not resid <= IDENTITY_TOL:
            raise DecompositionError(f"replication {r}: decomposition residual {resid:.3e} exceeds {IDENTITY_TOL}")
        metrics = {
            "dsc": np.max(np.abs(dsc)),
            "eps": np.max(np.abs(terms["eps"])),
            "mix": np.max(np.abs(terms["mix"])),
            "prc": np.max(np.abs(terms["prc"])),
            "sup": np.max(np.abs(total)),
        }
        if include_indep:
            metrics["indep"] = np.max(np.abs(terms["indep"]))
        metrics["residual"] = resid
        for key, val in metrics.items():
            report.add(name, n, grid.p, h, m, r, key, val)
    for key in ("dsc", "eps", "mix", "prc", "sup", "indep", "residual"):
        vals = report.values(key)
        if vals.size:
            report.add_summary(name, n, grid.p, h, m, f"{key}_mean", vals.mean())
    return report


def estimator_comparison(
    n: int,
    p: int,
    noise_sd: float,
    m_list: Iterable[int],
    h_grid: Sequence[float],
    reps: int,
    rng: RngSpec,
    targets: Sequence[ProcessSpec] | None = None,
) -> ExperimentReport:
    """Upper-triangle smoother versus the off-diagonal comparator.

    Both estimators see the same simulated samples. Summary metric
    ``best_sup_error_mean`` gives the best-of-grid mean error per
    (target, estimator, order); experiment ids read ``compare/<target>/<domain>``.
    """
    targets = list(targets) if targets is not None else [OUProcess(3.0, 2.0), TwoTermProcess()]
    grid = make_equidistant_grid(p)
    h_grid = tuple(float(h) for h in h_grid)
    report = ExperimentReport()
    best: dict[tuple[str, str, int], tuple[float, float]] = {}
    for t_idx, target in enumerate(targets):
        zs = simulate_covariances(target, n, grid, noise_sd, reps, rng.child(t_idx))
        for domain in PairDomain:
            for m in m_list:
                name = f"compare/{target.name}/{domain.value}"
                errs = _sweep_errors(grid, zs, target.kernel, m, h_grid, domain)
                b = _summarise_sweep(report, name, n, p, m, h_grid, errs)
                mean_b = errs[b].mean() if np.isfinite(errs[b]).all() else np.inf
                best[(target.name, domain.value, m)] = (h_grid[b], mean_b)
    report.extras["best"] = best
    report.extras["pair_counts"] = {"triangle": p * (p - 1) // 2, "offdiag": p * (p - 1)}
    return report


def clt_check(
    process: ProcessSpec,
    n: int,
    p: int,
    h: float,
    m: int,
    points: Sequence[tuple[float, float]],
    reps: int,
    rng: RngSpec,
    noise_sd: float = 0.75,
) -> ExperimentReport:
    """Replication mean and variance of ``sqrt(n) (hat Gamma - Gamma)`` at fixed points.

    The variance is compared with ``Gamma(x,x) Gamma(y,y) + Gamma(x,y)^2``, the
    fourth-moment covariance of a Gaussian process. ``smoothing_bias`` is the
    deterministic ``sqrt(n) (sum w Gamma(x_j, x_k) - Gamma(x, y))``.
    """
    if reps < 2:
        raise ValueError("reps must be >= 2")
    grid = make_equidistant_grid(p)
    pts = np.array([sorted(pt) for pt in points], dtype=float)
    evals = TriangleGrid(pts)
    fld = compute_weight_field(grid, SmootherConfig(m, h), evals)
    if fld.holes.size:
        raise HoleError("evaluation point without usable pairs")
    zs = simulate_covariances(process, n, grid, noise_sd, reps, rng)
    truth = _truth_at(process.kernel, evals)
    stat = np.sqrt(n) * (fld.apply(fld.pair_values(zs)) - truth[:, None])
    xg = grid.points
    bias = np.sqrt(n) * (fld.apply(fld.pair_values(process.kernel(xg[:, None], xg[None, :]))) - truth)
    report = ExperimentReport()
    for e, (x, y) in enumerate(pts):
        name = f"clt/{x:g},{y:g}"
        for r in range(reps):
            report.add(name, n, p, h, m, r, "scaled_error", stat[e, r])
        mean = stat[e].mean()
        var = stat[e].var(ddof=1)
        target = gaussian_fourth_moment(process.kernel, x, y)
        for metric, val in (
            ("mean", mean),
            ("mean_se", np.sqrt(var / reps)),
            ("variance", var),
            ("variance_theory", target),
            ("variance_ratio", var / target),
            ("smoothing_bias", bias[e]),
        ):
            report.add_summary(name, n, p, h, m, metric, val)
    return report


def rate_table(
    process: ProcessSpec,
    n_list: Sequence[int],
    p_rule: int | Callable[[int], int],
    noise_sd: float,
    m: int,
    reps: int,
    rng: RngSpec,
    h_grid: Sequence[float] = tuple(round(0.05 * i, 10) for i in range(1, 21)),
) -> ExperimentReport:
    """Oracle-bandwidth mean sup error per sample size and its log-log slope in ``n``."""
    report = ExperimentReport()
    best_err = []
    best_h = []
    for n in n_list:
        p = p_rule(n) if callable(p_rule) else int(p_rule)
        sweep = bandwidth_sweep(process, n, p, noise_sd, m, h_grid, reps, rng.child(int(n)))
        for row in sweep.all_rows():
            (report.summary if row.replication < 0 else report.rows).append(row._replace(experiment="rates"))
        curve = sweep.extras["mean_curve"]
        b = int(np.argmin(curve))
        best_err.append(curve[b])
        best_h.append(sweep.extras["h_grid"][b])
    if len(n_list) >= 2 and np.all(np.isfinite(best_err)):
        slope = float(np.polyfit(np.log(n_list), np.log(best_err), 1)[0])
    else:
        slope = np.nan
    report.add_summary("rates", 0, 0, np.nan, m, "slope_log_error_vs_log_n", slope)
    report.extras.update(n_list=list(n_list), best_error=best_err, best_h=best_h, slope=slope)
    return report
