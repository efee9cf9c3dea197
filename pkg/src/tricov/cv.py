"""K-fold cross-validation of the bandwidth under the sup-norm criterion."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .estimator import check_samples, empirical_covariance
from .grid import DesignGrid, offdiagonal_eval_grid
from .rng import FOLDS, RngSpec
from .weights import SmootherConfig, compute_weight_field

__all__ = ["CVPlan", "CVReport", "kfold_cv", "h_grid"]


def h_grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive bandwidth grid ``start, start + step, ..., stop``, rounded to 12 digits."""
    if step <= 0 or stop < start:
        raise ValueError("need step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 12) for i in range(count))


@dataclass(frozen=True)
class CVPlan:
    folds: int
    h_candidates: tuple[float, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.folds) != self.folds or self.folds < 2:
            raise ValueError("need at least two folds")
        hs = tuple(float(h) for h in self.h_candidates)
        if not hs:
            raise ValueError("empty bandwidth grid")
        if any(not 0.0 < h <= 1.0 for h in hs):
            raise ValueError("bandwidths must lie in (0, 1]")
        if any(b < a for a, b in zip(hs, hs[1:])):
            raise ValueError("bandwidth candidates must be ascending")
        object.__setattr__(self, "h_candidates", hs)

    def assign(self, n: int) -> list[np.ndarray]:
        """Seeded permutation of curve indices cut into near-equal contiguous folds."""
        if self.folds > n:
            raise ValueError(f"{self.folds} folds requested for {n} curves")
        perm = RngSpec(self.seed).child(FOLDS).generator().permutation(n)
        return [np.sort(f) for f in np.array_split(perm, self.folds)]


@dataclass(frozen=True, eq=False)
class CVReport:
    h_candidates: tuple[float, ...]
    scores: np.ndarray
    fold_scores: np.ndarray
    chosen_index: int
    folds: list[np.ndarray]

    @property
    def chosen_h(self) -> float:
        return self.h_candidates[self.chosen_index]


def kfold_cv(samples, grid: DesignGrid, base_cfg: SmootherConfig, plan: CVPlan) -> CVReport:
    """Mean over folds of ``max_{j<k} |hat Gamma_train(x_j, x_k) - z_test_{j,k}|`` per bandwidth.

    Training curves of the remaining folds are pooled into one covariance.
    Bandwidths whose estimate has holes score ``inf``; ties go to the
    smaller bandwidth.
    """
    y = check_samples(samples)
    if y.shape[1] != grid.p:
        raise ValueError("sample columns do not match the grid")
    folds = plan.assign(y.shape[0])
    if min(f.size for f in folds) < 2:
        raise ValueError("every fold needs at least two curves to form a test covariance")

    evals = offdiagonal_eval_grid(grid)
    j, k = evals.index[:, 0], evals.index[:, 1]
    train, test = [], []
    for f in folds:
        mask = np.ones(y.shape[0], dtype=bool)
        mask[f] = False
        train.append(empirical_covariance(y[mask]).z)
        test.append(empirical_covariance(y[f]).z[j, k])
    train_z = np.stack(train)
    test_z = np.stack(test, axis=1)

    fold_scores = np.empty((plan.folds, len(plan.h_candidates)))
    for c, h in enumerate(plan.h_candidates):
        field = compute_weight_field(grid, replace(base_cfg, bandwidth=h), evals)
        if field.holes.size:
            fold_scores[:, c] = np.inf
            continue
        est = field.apply(field.pair_values(train_z))
        fold_scores[:, c] = np.max(np.abs(est - test_z), axis=0)
    scores = fold_scores.mean(axis=0)
    return CVReport(plan.h_candidates, scores, fold_scores, int(np.argmin(scores)), folds)
