"""Simulation processes with closed-form covariance kernels.

All generators are exact in law at the design points: the Ornstein-Uhlenbeck
and Brownian paths use the exact Gaussian transition between consecutive
points, and the two-term process is a rank-2 Gaussian sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import DesignGrid
from .rng import NOISE, PROCESS, RngSpec

__all__ = [
    "OUProcess",
    "TwoTermProcess",
    "BrownianMotion",
    "ProcessSpec",
    "make_process",
    "ou_kernel",
    "simulate_ou",
    "two_term_kernel",
    "simulate_two_term",
    "bm_kernel",
    "simulate_bm",
    "add_noise",
    "gaussian_fourth_moment",
]


def ou_kernel(s, t, theta: float = 3.0, sigma: float = 2.0):
    """Covariance of the OU process started at zero at time zero.

    ``sigma^2 / (2 theta) * (exp(-theta |t - s|) - exp(-theta (s + t)))``;
    not differentiable across ``s = t``.
    """
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    val = sigma**2 / (2.0 * theta) * (np.exp(-theta * np.abs(t - s)) - np.exp(-theta * (s + t)))
    return float(val) if val.ndim == 0 else val


def two_term_kernel(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    # pair the factors first so that swapping x and y is exact
    val = (4.0 / 9.0) * (np.sin(np.pi * x) * np.sin(np.pi * y)) + (8.0 / 9.0) * (
        np.cos(0.8 * np.pi * x) * np.cos(0.8 * np.pi * y)
    )
    return float(val) if val.ndim == 0 else val


def bm_kernel(s, t, sigma: float = 1.0):
    val = sigma**2 * np.minimum(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    return float(val) if np.ndim(val) == 0 else val


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return int(n)


def _as_grid(grid) -> DesignGrid:
    return grid if isinstance(grid, DesignGrid) else DesignGrid(grid)


def simulate_ou(n: int, grid: DesignGrid, theta: float, sigma: float, rng: RngSpec) -> np.ndarray:
    """``n`` OU paths at the design points, one substream per path."""
    n = _check_n(n)
    grid = _as_grid(grid)
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    x = grid.points
    xi = rng.curve_normals(PROCESS, n, grid.p)
    steps = np.diff(np.concatenate(([0.0], x)))
    decay = np.exp(-theta * steps)
    scale = np.sqrt(sigma**2 * -np.expm1(-2.0 * theta * steps) / (2.0 * theta))
    z = np.empty((n, grid.p))
    prev = np.zeros(n)
    for j in range(grid.p):
        prev = decay[j] * prev + scale[j] * xi[:, j]
        z[:, j] = prev
    return z


def simulate_two_term(n: int, grid: DesignGrid, rng: RngSpec) -> np.ndarray:
    """Rank-2 curves ``(2/3) N1 sin(pi x) + (2 sqrt 2 / 3) N2 cos(4 pi x / 5)``."""
    n = _check_n(n)
    x = _as_grid(grid).points
    coeff = rng.curve_normals(PROCESS, n, 2)
    basis = np.vstack([(2.0 / 3.0) * np.sin(np.pi * x), (2.0 * np.sqrt(2.0) / 3.0) * np.cos(0.8 * np.pi * x)])
    return coeff @ basis


def simulate_bm(n: int, grid: DesignGrid, sigma: float, rng: RngSpec) -> np.ndarray:
    n = _check_n(n)
    grid = _as_grid(grid)
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    steps = np.diff(np.concatenate(([0.0], grid.points)))
    xi = rng.curve_normals(PROCESS, n, grid.p)
    return np.cumsum(sigma * np.sqrt(steps) * xi, axis=1)


def add_noise(samples: np.ndarray, noise_sd: float, rng: RngSpec) -> np.ndarray:
    """Add iid ``N(0, noise_sd^2)`` errors, one substream per curve."""
    if noise_sd < 0.0:
        raise ValueError("noise_sd must be nonnegative")
    samples = np.asarray(samples, dtype=float)
    if noise_sd == 0.0:
        return samples.copy()
    n, p = samples.shape
    return samples + noise_sd * rng.curve_normals(NOISE, n, p)


def gaussian_fourth_moment(kernel, x: float, y: float) -> float:
    """Asymptotic variance of ``sqrt(n) (hat Gamma - Gamma)`` at ``(x, y)`` for Gaussian Z.

    ``E[Z(x)^2 Z(y)^2] - Gamma(x, y)^2 = Gamma(x, x) Gamma(y, y) + Gamma(x, y)^2``.
    """
    return float(kernel(x, x) * kernel(y, y) + kernel(x, y) ** 2)


@dataclass(frozen=True)
class OUProcess:
    theta: float = 3.0
    sigma: float = 2.0
    name = "ou"

    def __post_init__(self) -> None:
        if self.theta <= 0.0:
            raise ValueError("theta must be positive")
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")

    def kernel(self, s, t):
        return ou_kernel(s, t, self.theta, self.sigma)

    def simulate(self, n: int, grid: DesignGrid, rng: RngSpec) -> np.ndarray:
        return simulate_ou(n, grid, self.theta, self.sigma, rng)


@dataclass(frozen=True)
class TwoTermProcess:
    name = "twoterm"

    def kernel(self, s, t):
        return two_term_kernel(s, t)

    def simulate(self, n: int, grid: DesignGrid, rng: RngSpec) -> np.ndarray:
        return simulate_two_term(n, grid, rng)


@dataclass(frozen=True)
class BrownianMotion:
    sigma: float = 1.0
    name = "bm"

    def __post_init__(self) -> None:
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")

    def kernel(self, s, t):
        return bm_kernel(s, t, self.sigma)

    def simulate(self, n: int, grid: DesignGrid, rng: RngSpec) -> np.ndarray:
        return simulate_bm(n, grid, self.sigma, rng)


ProcessSpec = OUProcess | TwoTermProcess | BrownianMotion


def make_process(name: str, theta: float = 3.0, sigma: float = 2.0) -> ProcessSpec:
    name = name.lower()
    if name == "ou":
        return OUProcess(theta, sigma)
    if name == "twoterm":
        return TwoTermProcess()
    if name == "bm":
        return BrownianMotion(sigma)
    raise ValueError(f"unknown process {name!r}; use 'ou', 'twoterm' or 'bm'")
