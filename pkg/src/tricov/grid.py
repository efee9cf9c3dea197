"""Design-point grids on [0, 1] and evaluation grids on the upper triangle."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DesignGrid",
    "TriangleGrid",
    "make_equidistant_grid",
    "make_density_grid",
    "triangle_eval_grid",
    "offdiagonal_eval_grid",
    "lattice_eval_grid",
]

_CDF_NODES = 1025
_BISECTION_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DesignGrid:
    """Strictly increasing design points x_1 < ... < x_p inside [0, 1]."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a design grid needs at least two points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("design points must be finite")
        if pts[0] < 0.0 or pts[-1] > 1.0:
            raise ValueError("design points must lie in [0, 1]")
        if np.any(np.diff(pts) <= 0.0):
            raise ValueError("design points must be strictly increasing")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def p(self) -> int:
        return int(self.points.size)

    def __len__(self) -> int:
        return self.p

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DesignGrid):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __hash__(self) -> int:
        return hash(self.points.tobytes())

    def key(self) -> bytes:
        return self.points.tobytes()


@dataclass(frozen=True, eq=False)
class TriangleGrid:
    """Evaluation points ``(x, y)`` with ``x <= y``.

    ``index`` holds the design indices ``(j, k)`` when the points are design
    pairs and is ``None`` for free-standing lattices.
    """

    pairs: np.ndarray
    source: str = "lattice"
    index: np.ndarray | None = None

    def __post_init__(self) -> None:
        pairs = np.asarray(self.pairs, dtype=float).reshape(-1, 2)
        if np.any(pairs[:, 0] > pairs[:, 1]):
            raise ValueError("evaluation points must satisfy x <= y")
        if pairs.size and (pairs.min() < 0.0 or pairs.max() > 1.0):
            raise ValueError("evaluation points must lie in [0, 1]^2")
        object.__setattr__(self, "pairs", _frozen(pairs))
        if self.index is not None:
            idx = np.asarray(self.index, dtype=np.intp).reshape(-1, 2)
            idx.setflags(write=False)
            object.__setattr__(self, "index", idx)

    def __len__(self) -> int:
        return int(self.pairs.shape[0])

    @property
    def x(self) -> np.ndarray:
        return self.pairs[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.pairs[:, 1]

    def key(self) -> bytes:
        return self.pairs.tobytes()

    def diagonal_mask(self) -> np.ndarray:
        return self.pairs[:, 0] == self.pairs[:, 1]


def make_equidistant_grid(p: int) -> DesignGrid:
    """Midpoint grid ``x_j = (j - 1/2) / p``."""
    if int(p) != p or p < 2:
        raise ValueError(f"p must be an integer >= 2, got {p!r}")
    p = int(p)
    return DesignGrid((np.arange(1, p + 1) - 0.5) / p)


def make_density_grid(
    p: int, density: Callable[[np.ndarray], np.ndarray] | np.ndarray
) -> DesignGrid:
    """Quantile grid of a positive design density.

    ``density`` is either a vectorised callable on [0, 1] or its values on a
    uniform tabulation of [0, 1] (at least 1024 nodes recommended). Points solve
    ``F(x_j) = (j - 1/2) / p`` for the normalised CDF of the piecewise linear
    interpolant, found by bisection to 1e-12.
    """
    if int(p) != p or p < 2:
        raise ValueError(f"p must be an integer >= 2, got {p!r}")
    if callable(density):
        nodes = np.linspace(0.0, 1.0, _CDF_NODES)
        f = np.asarray(density(nodes), dtype=float) * np.ones_like(nodes)
    else:
        f = np.asarray(density, dtype=float).ravel()
        if f.size < 2:
            raise ValueError("tabulated density needs at least two nodes")
        nodes = np.linspace(0.0, 1.0, f.size)
    if not np.all(np.isfinite(f)) or np.any(f <= 0.0):
        raise ValueError("density values must be finite and strictly positive")

    dx = np.diff(nodes)
    cell = 0.5 * (f[:-1] + f[1:]) * dx
    cum = np.concatenate(([0.0], np.cumsum(cell)))
    total = cum[-1]
    slope = np.diff(f) / dx

    def cdf(x: np.ndarray) -> np.ndarray:
        i = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, nodes.size - 2)
        d = x - nodes[i]
        return (cum[i] + f[i] * d + 0.5 * slope[i] * d * d) / total

    target = (np.arange(1, int(p) + 1) - 0.5) / int(p)
    lo = np.zeros_like(target)
    hi = np.ones_like(target)
    while np.max(hi - lo) > _BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        below = cdf(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return DesignGrid(0.5 * (lo + hi))


def triangle_eval_grid(grid: DesignGrid) -> TriangleGrid:
    """All design pairs ``(x_j, x_k)`` with ``j <= k`` in row-major order."""
    j, k = np.triu_indices(grid.p)
    x = grid.points
    return TriangleGrid(np.column_stack([x[j], x[k]]), "design", np.column_stack([j, k]))


def offdiagonal_eval_grid(grid: DesignGrid) -> TriangleGrid:
    """Design pairs with ``j < k``; the points scored by cross-validation."""
    j, k = np.triu_indices(grid.p, 1)
    x = grid.points
    return TriangleGrid(np.column_stack([x[j], x[k]]), "design", np.column_stack([j, k]))


def lattice_eval_grid(size: int) -> TriangleGrid:
    """Regular ``size x size`` lattice on [0, 1]^2 restricted to ``x <= y``."""
    if size < 2:
        raise ValueError("lattice size must be >= 2")
    t = np.linspace(0.0, 1.0, size)
    j, k = np.triu_indices(size)
    return TriangleGrid(np.column_stack([t[j], t[k]]), "lattice")
