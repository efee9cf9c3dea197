"""Monomial basis vectors and compactly supported bivariate kernels."""

from __future__ import annotations

import enum
from math import factorial

import numpy as np

__all__ = [
    "KernelKind",
    "SUPPORT_SLACK",
    "basis_len",
    "monomial_exponents",
    "monomial_vector",
    "monomial_matrix",
    "kernel_eval",
]

# Relative slack on the closed support [-1, 1]; absorbs rounding in (x_j - x) / h.
SUPPORT_SLACK = 1e-12


class KernelKind(enum.Enum):
    UNIFORM = "uniform"
    EPANECHNIKOV = "epanechnikov"

    @property
    def code(self) -> int:
        return 0 if self is KernelKind.UNIFORM else 1

    @classmethod
    def parse(cls, value: KernelKind | str) -> KernelKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown kernel {value!r}; use 'uniform' or 'epanechnikov'") from None


def basis_len(m: int) -> int:
    """Number of monomials of total degree <= m in two variables."""
    if m < 0:
        raise ValueError("polynomial order must be nonnegative")
    return (m + 1) * (m + 2) // 2


def monomial_exponents(m: int) -> list[tuple[int, int]]:
    """Exponent pairs ``(r1, r2)`` in basis order.

    Block ``l`` lists ``u1^l, u1^(l-1) u2, ..., u2^l``, so the order-``m-1``
    basis is a prefix of the order-``m`` basis.
    """
    return [(l - i, i) for l in range(m + 1) for i in range(l + 1)]


def _norms(m: int) -> np.ndarray:
    return np.array([1.0 / (factorial(a) * factorial(b)) for a, b in monomial_exponents(m)])


def monomial_vector(m: int, u1: float, u2: float) -> np.ndarray:
    """``U_m(u1, u2)``: scaled monomials ``u1^a u2^b / (a! b!)``, constant first."""
    return monomial_matrix(m, np.array([u1]), np.array([u2]))[0]


def monomial_matrix(m: int, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Rows are ``U_m`` evaluated at each ``(u1[i], u2[i])``."""
    u1 = np.asarray(u1, dtype=float).ravel()
    u2 = np.asarray(u2, dtype=float).ravel()
    exps = monomial_exponents(m)
    out = np.empty((u1.size, len(exps)))
    for c, (a, b) in enumerate(exps):
        out[:, c] = u1**a * u2**b
    return out * _norms(m)


def kernel_eval(kind: KernelKind | str, u1, u2):
    """Product kernel on [-1, 1]^2; zero outside.

    Uniform is the indicator of the square; the Epanechnikov product is
    ``(3/4)^2 (1 - u1^2)(1 - u2^2)``.
    """
    kind = KernelKind.parse(kind)
    a1 = np.abs(np.asarray(u1, dtype=float))
    a2 = np.abs(np.asarray(u2, dtype=float))
    inside = (a1 <= 1.0 + SUPPORT_SLACK) & (a2 <= 1.0 + SUPPORT_SLACK)
    if kind is KernelKind.UNIFORM:
        val = inside.astype(float)
    else:
        v1 = np.maximum(1.0 - a1 * a1, 0.0)
        v2 = np.maximum(1.0 - a2 * a2, 0.0)
        val = np.where(inside, 0.5625 * v1 * v2, 0.0)
    if np.ndim(val) == 0:
        return float(val)
    return val
