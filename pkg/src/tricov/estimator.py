"""Empirical covariances, the smoothed kernel estimate and derived curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import DesignGrid, TriangleGrid, triangle_eval_grid
from .weights import SmootherConfig, WeightField, compute_weight_field

__all__ = [
    "EmpiricalCovariance",
    "CovarianceSurface",
    "StdCurve",
    "check_samples",
    "empirical_covariance",
    "empirical_covariances",
    "smooth_covariance",
    "estimate",
    "mirror_query",
    "std_curve",
    "correlation_surface",
]

_MATCH_TOL = 1e-12


def check_samples(samples) -> np.ndarray:
    y = np.asarray(samples, dtype=float)
    if y.ndim != 2:
        raise ValueError(f"samples must be an (n, p) matrix, got shape {y.shape}")
    n, p = y.shape
    if n < 2:
        raise ValueError("at least two curves are needed (the covariance divides by n - 1)")
    if p < 2:
        raise ValueError("at least two design points are needed")
    if not np.all(np.isfinite(y)):
        raise ValueError("samples contain non-finite values")
    return y


@dataclass(frozen=True, eq=False)
class EmpiricalCovariance:
    z: np.ndarray
    means: np.ndarray


def _mirror_upper(z: np.ndarray) -> np.ndarray:
    upper = np.triu(z)
    return upper + np.swapaxes(np.triu(z, 1), -1, -2)


def empirical_covariance(samples) -> EmpiricalCovariance:
    """``z_{j,k} = (n-1)^-1 sum_i (Y_ij Y_ik - Ybar_j Ybar_k)``, exactly symmetric."""
    y = check_samples(samples)
    means = y.mean(axis=0)
    c = y - means
    z = _mirror_upper(c.T @ c / (y.shape[0] - 1))
    return EmpiricalCovariance(z, means)


def empirical_covariances(stack: np.ndarray) -> np.ndarray:
    """Batched version for an ``(R, n, p)`` stack; returns ``(R, p, p)``."""
    y = np.asarray(stack, dtype=float)
    if y.ndim != 3 or y.shape[1] < 2:
        raise ValueError("expected an (R, n, p) stack with n >= 2")
    c = y - y.mean(axis=1, keepdims=True)
    return _mirror_upper(np.matmul(np.swapaxes(c, 1, 2), c) / (y.shape[1] - 1))


@dataclass(frozen=True, eq=False)
class CovarianceSurface:
    """Kernel values on evaluation points with ``x <= y``.

    ``values`` is NaN at ``holes``. Queries with ``x > y`` are answered by
    mirroring, see :func:`mirror_query`.
    """

    evals: TriangleGrid
    values: np.ndarray
    holes: np.ndarray
    config: SmootherConfig | None = None

    def __len__(self) -> int:
        return len(self.evals)

    def index_of(self, x: float, y: float) -> int:
        a, b = (x, y) if x <= y else (y, x)
        pts = self.evals.pairs
        hit = np.flatnonzero((np.abs(pts[:, 0] - a) <= _MATCH_TOL) & (np.abs(pts[:, 1] - b) <= _MATCH_TOL))
        if hit.size == 0:
            raise KeyError(f"({x}, {y}) is not an evaluation point of this surface")
        return int(hit[0])

    def __call__(self, x: float, y: float) -> float:
        return mirror_query(self, x, y)

    def to_matrix(self) -> np.ndarray:
        """Full symmetric matrix for surfaces evaluated on all design pairs."""
        idx = self.evals.index
        if idx is None:
            raise ValueError("surface is not indexed by design pairs")
        p = int(idx.max()) + 1
        out = np.full((p, p), np.nan)
        out[idx[:, 0], idx[:, 1]] = self.values
        out[idx[:, 1], idx[:, 0]] = self.values
        return out


def _surface(field: WeightField, values: np.ndarray) -> CovarianceSurface:
    values = np.asarray(values, dtype=float)
    values.setflags(write=False)
    return CovarianceSurface(field.evals, values, field.holes, field.config)


def smooth_covariance(
    z: np.ndarray,
    grid: DesignGrid,
    cfg: SmootherConfig,
    evals: TriangleGrid | None = None,
) -> CovarianceSurface:
    """Apply the weight field to a given ``(p, p)`` matrix of pair values."""
    z = np.asarray(z, dtype=float)
    if z.shape != (grid.p, grid.p):
        raise ValueError(f"pair matrix has shape {z.shape}, expected {(grid.p, grid.p)}")
    if evals is None:
        evals = triangle_eval_grid(grid)
    field = compute_weight_field(grid, cfg, evals)
    return _surface(field, field.apply(field.pair_values(z)))


def estimate(
    samples,
    grid: DesignGrid,
    cfg: SmootherConfig,
    evals: TriangleGrid | None = None,
) -> CovarianceSurface:
    """Smoothed covariance kernel from an ``(n, p)`` sample matrix.

    Only off-diagonal empirical covariances enter: ``j < k`` for the upper
    triangle smoother, ``j != k`` for the off-diagonal comparator.
    """
    y = check_samples(samples)
    if y.shape[1] != grid.p:
        raise ValueError(f"samples have {y.shape[1]} columns but the grid has {grid.p} points")
    if evals is None:
        evals = triangle_eval_grid(grid)
    return smooth_covariance(empirical_covariance(y).z, grid, cfg, evals)


def mirror_query(surface: CovarianceSurface, x: float, y: float) -> float:
    return float(surface.values[surface.index_of(x, y)])


@dataclass(frozen=True, eq=False)
class StdCurve:
    x: np.ndarray
    sd: np.ndarray
    clamped: np.ndarray

    @property
    def n_clamped(self) -> int:
        return int(self.clamped.sum())


def _diagonal(surface: CovarianceSurface) -> tuple[np.ndarray, np.ndarray]:
    diag = np.flatnonzero(surface.evals.diagonal_mask())
    if diag.size == 0:
        raise ValueError("surface has no diagonal evaluation points")
    order = np.argsort(surface.evals.x[diag], kind="stable")
    diag = diag[order]
    return surface.evals.x[diag], surface.values[diag]


def std_curve(surface: CovarianceSurface) -> StdCurve:
    """``sd(x) = sqrt(max(Gamma(x, x), 0))``; negative variances are clamped and flagged."""
    x, var = _diagonal(surface)
    clamped = var < 0.0
    with np.errstate(invalid="ignore"):
        sd = np.sqrt(np.where(clamped, 0.0, var))
    return StdCurve(x, sd, clamped)


def correlation_surface(surface: CovarianceSurface, sd_floor: float = 1e-6) -> CovarianceSurface:
    """Correlations ``Gamma(x, y) / (sd(x) sd(y))`` clamped to [-1, 1].

    Points whose standard deviations fall below ``sd_floor`` become holes.
    """
    curve = std_curve(surface)
    lookup = dict(zip(curve.x.tolist(), curve.sd.tolist()))
    try:
        sx = np.array([lookup[v] for v in surface.evals.x.tolist()])
        sy = np.array([lookup[v] for v in surface.evals.y.tolist()])
    except KeyError as exc:
        raise ValueError(f"no diagonal estimate at x = {exc.args[0]}") from None
    bad = ~(sx >= sd_floor) | ~(sy >= sd_floor) | np.isnan(surface.values)
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = np.clip(surface.values / (sx * sy), -1.0, 1.0)
    rho[surface.evals.diagonal_mask()] = 1.0
    rho[bad] = np.nan
    rho.setflags(write=False)
    return CovarianceSurface(surface.evals, rho, np.flatnonzero(bad), surface.config)
