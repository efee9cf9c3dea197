"""Local-polynomial weight fields on the upper triangle.

For an evaluation point ``(x, y)`` the estimator fits a bivariate polynomial
of total degree ``m`` to the empirical covariances ``z_{j,k}`` of pairs in the
window ``max(|x_j - x|, |x_k - y|) <= h`` and reads off the intercept. The
intercept is linear in ``z``, so the fit reduces to a data-independent weight
field ``w_{j,k}(x, y; h)`` which is computed once per configuration.
"""

from __future__ import annotations

import enum
import threading
from collections import OrderedDict
from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy import sparse

from . import _backend
from .basis import SUPPORT_SLACK, KernelKind, basis_len, monomial_exponents
from .grid import DesignGrid, TriangleGrid, triangle_eval_grid

__all__ = [
    "PairDomain",
    "SmootherConfig",
    "WeightField",
    "AxiomReport",
    "pair_indices",
    "build_gram",
    "compute_weight_field",
    "verify_weight_axioms",
    "clear_cache",
]


class PairDomain(enum.Enum):
    """Which empirical covariances enter the smoother.

    ``UPPER_TRIANGLE`` uses pairs ``j < k`` only; ``OFF_DIAGONAL`` drops the
    empirical variances but smooths across the diagonal with all ``j != k``.
    """

    UPPER_TRIANGLE = "triangle"
    OFF_DIAGONAL = "offdiag"

    @property
    def code(self) -> int:
        return 0 if self is PairDomain.UPPER_TRIANGLE else 1

    @classmethod
    def parse(cls, value: PairDomain | str) -> PairDomain:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown pair domain {value!r}; use 'triangle' or 'offdiag'") from None


@dataclass(frozen=True)
class SmootherConfig:
    order: int
    bandwidth: float
    kernel: KernelKind = KernelKind.EPANECHNIKOV
    pair_domain: PairDomain = PairDomain.UPPER_TRIANGLE
    min_eigen_tol: float = 1e-8

    def __post_init__(self) -> None:
        if int(self.order) != self.order or self.order < 0:
            raise ValueError(f"order must be a nonnegative integer, got {self.order!r}")
        if not 0.0 < self.bandwidth <= 1.0:
            raise ValueError(f"bandwidth must lie in (0, 1], got {self.bandwidth!r}")
        if not self.min_eigen_tol > 0.0:
            raise ValueError("min_eigen_tol must be positive")
        object.__setattr__(self, "order", int(self.order))
        object.__setattr__(self, "bandwidth", float(self.bandwidth))
        object.__setattr__(self, "kernel", KernelKind.parse(self.kernel))
        object.__setattr__(self, "pair_domain", PairDomain.parse(self.pair_domain))

    @property
    def basis_len(self) -> int:
        return basis_len(self.order)


def pair_indices(p: int, domain: PairDomain | str) -> tuple[np.ndarray, np.ndarray]:
    """Design indices ``(j, k)`` of the pair columns, in column order."""
    if PairDomain.parse(domain) is PairDomain.UPPER_TRIANGLE:
        return np.triu_indices(p, 1)
    j, k = np.nonzero(~np.eye(p, dtype=bool))
    return j, k


def _basis_tables(m: int) -> tuple[np.ndarray, np.ndarray]:
    exps = np.array(monomial_exponents(m), dtype=np.int_).reshape(-1, 2)
    norms = np.array([1.0 / (factorial(a) * factorial(b)) for a, b in exps])
    return np.ascontiguousarray(exps), norms


def _as_points(evals) -> np.ndarray:
    if isinstance(evals, TriangleGrid):
        return evals.pairs
    return np.asarray(evals, dtype=float).reshape(-1, 2)


def build_gram(point, grid: DesignGrid, cfg: SmootherConfig, backend: str | None = None) -> np.ndarray:
    """Local Gram matrix ``(p h)^-2 sum U U^T K`` at one evaluation point."""
    x, y = (float(v) for v in point)
    if cfg.pair_domain is PairDomain.UPPER_TRIANGLE and x > y:
        raise ValueError("upper-triangle smoothing requires x <= y")
    core = _backend.get_backend(backend)
    exps, norms = _basis_tables(cfg.order)
    grams, _ = core.accumulate_grams(
        np.ascontiguousarray(grid.points), np.array([x]), np.array([y]),
        cfg.bandwidth, cfg.order, cfg.kernel.code, cfg.pair_domain.code, exps, norms,
    )
    return grams[0]


@dataclass(frozen=True, eq=False)
class WeightField:
    """Sparse linear map from pair covariances to estimates at ``evals``.

    ``matrix`` has one row per evaluation point and one column per pair
    ``(pair_j[c], pair_k[c])``. Rows of holes are empty and their
    ``effective_order`` is -1.
    """

    grid: DesignGrid
    config: SmootherConfig
    evals: TriangleGrid
    matrix: sparse.csr_matrix
    pair_j: np.ndarray
    pair_k: np.ndarray
    effective_order: np.ndarray
    min_eigen: np.ndarray
    counts: np.ndarray

    @property
    def holes(self) -> np.ndarray:
        return np.flatnonzero(self.effective_order < 0)

    @property
    def n_pairs(self) -> int:
        return int(self.pair_j.size)

    def pair_values(self, z: np.ndarray) -> np.ndarray:
        """Gather ``z[j, k]`` over the pair columns; accepts ``(p, p)`` or ``(R, p, p)``."""
        z = np.asarray(z, dtype=float)
        if z.ndim == 2:
            return z[self.pair_j, self.pair_k]
        return z[:, self.pair_j, self.pair_k].T

    def apply(self, zpairs: np.ndarray) -> np.ndarray:
        """Estimates for pair values ``zpairs`` of shape ``(P,)`` or ``(P, R)``; NaN at holes."""
        out = np.asarray(self.matrix @ zpairs, dtype=float)
        if self.holes.size:
            out[self.holes] = np.nan
        return out

    def weights_at(self, e: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        lo, hi = self.matrix.indptr[e], self.matrix.indptr[e + 1]
        cols = self.matrix.indices[lo:hi]
        return self.pair_j[cols], self.pair_k[cols], self.matrix.data[lo:hi]


_CACHE: OrderedDict = OrderedDict()
_CACHE_SIZE = 64
_CACHE_NNZ = 16_000_000
_CACHE_LOCK = threading.Lock()


def clear_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()


def compute_weight_field(
    grid: DesignGrid,
    cfg: SmootherConfig,
    evals: TriangleGrid | np.ndarray | None = None,
    backend: str | None = None,
    cache: bool = True,
) -> WeightField:
    """Solve the local normal equations at every evaluation point.

    When the smallest eigenvalue of the Gram matrix drops below
    ``min_eigen_tol * trace / N`` the order is lowered one step at a time down
    to 0. Points without a single positive-kernel pair become holes.
    """
    if evals is None:
        evals = triangle_eval_grid(grid)
    elif not isinstance(evals, TriangleGrid):
        evals = TriangleGrid(_as_points(evals))
    core = _backend.get_backend(backend)
    key = (grid.key(), cfg, evals.key(), core.__name__)
    if cache:
        with _CACHE_LOCK:
            hit = _CACHE.get(key)
            if hit is not None:
                _CACHE.move_to_end(key)
                return hit

    x = np.ascontiguousarray(grid.points)
    ex = np.ascontiguousarray(evals.x)
    ey = np.ascontiguousarray(evals.y)
    if cfg.pair_domain is PairDomain.UPPER_TRIANGLE and np.any(ex > ey):
        raise ValueError("upper-triangle smoothing requires x <= y at every evaluation point")
    m = cfg.order
    N = basis_len(m)
    exps, norms = _basis_tables(m)
    h = cfg.bandwidth
    kcode, dcode = cfg.kernel.code, cfg.pair_domain.code

    grams, counts = core.accumulate_grams(x, ex, ey, h, m, kcode, dcode, exps, norms)
    E = ex.size
    order = np.full(E, -1, dtype=np.int_)
    min_eig = np.full(E, np.nan)
    coef = np.zeros((E, N))
    todo = np.flatnonzero(counts > 0)
    for o in range(m, -1, -1):
        if todo.size == 0:
            break
        n_o = basis_len(o)
        sub = grams[todo][:, :n_o, :n_o]
        eig = np.linalg.eigvalsh(sub)[:, 0]
        trace = np.trace(sub, axis1=1, axis2=2)
        ok = (trace > 0.0) & (eig >= cfg.min_eigen_tol * trace / n_o)
        done = todo[ok]
        if done.size:
            rhs = np.zeros((done.size, n_o, 1))
            rhs[:, 0, 0] = 1.0
            coef[done, :n_o] = np.linalg.solve(sub[ok], rhs)[:, :, 0]
            order[done] = o
            min_eig[done] = eig[ok]
        todo = todo[~ok]

    rows, cols, vals = core.emit_weights(
        x, ex, ey, h, kcode, dcode, exps, norms, order, np.ascontiguousarray(coef), counts
    )
    pj, pk = pair_indices(grid.p, cfg.pair_domain)
    mat = sparse.csr_matrix((vals, (rows, cols)), shape=(E, pj.size))
    mat.sum_duplicates()
    mat.sort_indices()
    field = WeightField(grid, cfg, evals, mat, pj, pk, order, min_eig, counts)
    if cache:
        with _CACHE_LOCK:
            _CACHE[key] = field
            while len(_CACHE) > 1 and (
                len(_CACHE) > _CACHE_SIZE or sum(f.matrix.nnz for f in _CACHE.values()) > _CACHE_NNZ
            ):
                _CACHE.popitem(last=False)
    return field


@dataclass(frozen=True)
class AxiomReport:
    """Worst-case measured constants of the weight axioms.

    ``moment`` is the largest residual over all reproduced moments, each
    divided by ``h^(r1 + r2)``; ``zeroth`` is ``max |sum w - 1|``.
    """

    zeroth: float
    moment: float
    out_of_window: float
    sup_scaled: float
    lipschitz_scaled: float
    holes: int

    def rows(self) -> list[tuple[str, float]]:
        return [
            ("W1_zeroth", self.zeroth),
            ("W1_moments", self.moment),
            ("W2_out_of_window", self.out_of_window),
            ("W3_sup_scaled", self.sup_scaled),
            ("W4_lipschitz_scaled", self.lipschitz_scaled),
        ]


def verify_weight_axioms(field: WeightField, grid: DesignGrid | None = None,
                         cfg: SmootherConfig | None = None) -> AxiomReport:
    grid = field.grid if grid is None else grid
    cfg = field.config if cfg is None else cfg
    h = cfg.bandwidth
    xp = grid.points
    mat = field.matrix.tocoo()
    e = mat.row
    dx = xp[field.pair_j[mat.col]] - field.evals.x[e]
    dy = xp[field.pair_k[mat.col]] - field.evals.y[e]
    w = mat.data
    E = len(field.evals)

    sums = np.bincount(e, weights=w, minlength=E)
    valid = field.effective_order >= 0
    zeroth = float(np.max(np.abs(sums[valid] - 1.0), initial=0.0))

    moment = zeroth
    for r1, r2 in monomial_exponents(cfg.order)[1:]:
        r = r1 + r2
        need = field.effective_order[e] >= r
        term = np.where(need, w * (dx / h) ** r1 * (dy / h) ** r2, 0.0)
        res = np.abs(np.bincount(e, weights=term, minlength=E))
        moment = max(moment, float(res.max(initial=0.0)))

    outside = np.maximum(np.abs(dx), np.abs(dy)) > h * (1.0 + SUPPORT_SLACK)
    out_of_window = float(np.max(np.abs(w[outside]), initial=0.0))

    ph2 = (grid.p * h) ** 2
    sup_scaled = float(np.max(np.abs(w), initial=0.0)) * ph2

    lip = 0.0
    dense_rows = field.matrix
    for a in range(E - 1):
        if not (valid[a] and valid[a + 1]):
            continue
        shift = float(np.max(np.abs(field.evals.pairs[a + 1] - field.evals.pairs[a])))
        if shift == 0.0:
            continue
        diff = dense_rows[a + 1] - dense_rows[a]
        dmax = float(np.max(np.abs(diff.data), initial=0.0))
        # beyond one bandwidth the bound saturates at C2 / (p h)^2
        lip = max(lip, dmax * ph2 / min(shift / h, 1.0))
    return AxiomReport(zeroth, moment, out_of_window, sup_scaled, lip, int((~valid).sum()))
