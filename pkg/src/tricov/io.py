"""CSV formats for samples, surfaces, curves and experiment reports.

Reals are written with 17 significant digits so that a write/read/write
cycle is byte-identical. Holes and undefined values are written as ``NA``.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Sequence

import numpy as np

from .estimator import CovarianceSurface, StdCurve
from .experiments import ExperimentReport
from .grid import DesignGrid, TriangleGrid, make_equidistant_grid
from .weights import WeightField

__all__ = [
    "ParseError",
    "format_real",
    "read_samples",
    "write_samples",
    "read_grid",
    "read_surface",
    "write_surface",
    "write_std_curve",
    "write_report",
    "write_weights",
    "write_cv_report",
]

NA = "NA"
REPORT_HEADER = ("experiment", "n", "p", "h", "m", "replication", "metric", "value")


class ParseError(ValueError):
    """Malformed input file; ``row`` and ``column`` are 1-based."""

    def __init__(self, path, row: int, column: int | None, message: str):
        where = f"row {row}" if column is None else f"row {row}, column {column}"
        super().__init__(f"{path}: {where}: {message}")
        self.path = str(path)
        self.row = row
        self.column = column


def format_real(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return NA
    return format(v, ".17g")


def _parse_real(text: str, path, row: int, col: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(path, row, col, f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise ParseError(path, row, col, f"non-finite value: {text!r}")
    return v


def _read_rows(path) -> list[list[str]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _open_out(path):
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_grid(path) -> DesignGrid:
    """Single-column file of design points."""
    rows = _read_rows(path)
    vals = []
    for i, r in enumerate(rows, start=1):
        if len(r) != 1:
            raise ParseError(path, i, None, f"expected one value per line, got {len(r)}")
        vals.append(_parse_real(r[0].strip(), path, i, 1))
    try:
        return DesignGrid(np.array(vals))
    except ValueError as exc:
        raise ParseError(path, 1, None, str(exc)) from None


def read_samples(path, grid_policy: str = "equidistant") -> tuple[np.ndarray, DesignGrid]:
    """Read an ``n x p`` sample matrix.

    ``grid_policy`` is ``"header"`` (first row holds the design points),
    ``"equidistant"`` (``x_j = (j - 1/2) / p``) or the path of a grid file.
    """
    rows = _read_rows(path)
    if not rows:
        raise ParseError(path, 1, None, "empty file")
    start = 0
    header = None
    if grid_policy == "header":
        header = [_parse_real(c.strip(), path, 1, j) for j, c in enumerate(rows[0], start=1)]
        start = 1
    width = len(rows[start]) if len(rows) > start else len(rows[0])
    data = []
    for i in range(start, len(rows)):
        r = rows[i]
        if len(r) != width:
            raise ParseError(path, i + 1, None, f"ragged row: {len(r)} fields, expected {width}")
        data.append([_parse_real(c.strip(), path, i + 1, j) for j, c in enumerate(r, start=1)])
    if not data:
        raise ParseError(path, start + 1, None, "no sample rows")
    y = np.array(data, dtype=float)

    if header is not None:
        if len(header) != width:
            raise ParseError(path, 1, None, f"header has {len(header)} fields, data rows have {width}")
        for j in range(1, len(header)):
            if header[j] <= header[j - 1]:
                raise ParseError(path, 1, j + 1, "design points must be strictly increasing")
        for j, v in enumerate(header, start=1):
            if not 0.0 <= v <= 1.0:
                raise ParseError(path, 1, j, f"design point {v} outside [0, 1]")
        grid = DesignGrid(np.array(header))
    elif grid_policy == "equidistant":
        if width < 2:
            raise ParseError(path, 1, None, "need at least two columns")
        grid = make_equidistant_grid(width)
    else:
        grid = read_grid(grid_policy)
        if grid.p != width:
            raise ParseError(path, 1, None, f"grid file has {grid.p} points, data rows have {width}")
    return y, grid


def write_samples(path, samples: np.ndarray, grid: DesignGrid | None = None) -> None:
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        if grid is not None:
            w.writerow([format_real(v) for v in grid.points])
        for row in np.asarray(samples, dtype=float):
            w.writerow([format_real(v) for v in row])


def write_surface(path, surface: CovarianceSurface) -> None:
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "value"])
        for (x, y), v in zip(surface.evals.pairs, surface.values):
            w.writerow([format_real(x), format_real(y), format_real(v)])


def read_surface(path) -> CovarianceSurface:
    rows = _read_rows(path)
    if not rows or [c.strip() for c in rows[0]] != ["x", "y", "value"]:
        raise ParseError(path, 1, None, "expected header 'x,y,value'")
    pts, vals = [], []
    for i, r in enumerate(rows[1:], start=2):
        if len(r) != 3:
            raise ParseError(path, i, None, f"expected 3 fields, got {len(r)}")
        x = _parse_real(r[0].strip(), path, i, 1)
        y = _parse_real(r[1].strip(), path, i, 2)
        if x > y:
            raise ParseError(path, i, None, "rows must satisfy x <= y")
        pts.append((x, y))
        vals.append(np.nan if r[2].strip() == NA else _parse_real(r[2].strip(), path, i, 3))
    values = np.array(vals, dtype=float)
    return CovarianceSurface(TriangleGrid(np.array(pts).reshape(-1, 2)), values, np.flatnonzero(np.isnan(values)))


def write_std_curve(path, curve: StdCurve) -> None:
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "sd", "clamped"])
        for x, sd, c in zip(curve.x, curve.sd, curve.clamped):
            w.writerow([format_real(x), format_real(sd), int(bool(c))])


def _report_cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format_real(v)


def write_report(path, report: ExperimentReport | Iterable[Sequence]) -> None:
    rows = report.all_rows() if isinstance(report, ExperimentReport) else list(report)
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for r in rows:
            w.writerow([_report_cell(v) for v in r])


def write_weights(path, field: WeightField) -> None:
    """Debug dump of the weight field: ``x, y, j, k, w`` with 0-based design indices."""
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "j", "k", "w"])
        for e, (x, y) in enumerate(field.evals.pairs):
            for j, k, wt in zip(*field.weights_at(e)):
                w.writerow([format_real(x), format_real(y), int(j), int(k), format_real(wt)])


def write_cv_report(path, cv) -> None:
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["h", "cv_score"] + [f"fold{r + 1}" for r in range(cv.fold_scores.shape[0])] + ["chosen"])
        for c, h in enumerate(cv.h_candidates):
            w.writerow(
                [format_real(h), format_real(cv.scores[c])]
                + [format_real(v) for v in cv.fold_scores[:, c]]
                + [int(c == cv.chosen_index)]
            )

