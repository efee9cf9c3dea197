"""Pure numpy version of the weight-field loops in ``_core.pyx``."""

from __future__ import annotations

import numpy as np

from .basis import SUPPORT_SLACK

_LIM = 1.0 + SUPPORT_SLACK


def _kernel(code: int, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    a1 = np.abs(u1)
    a2 = np.abs(u2)
    inside = (a1 <= _LIM) & (a2 <= _LIM)
    if code == 0:
        return inside.astype(float)
    v1 = 1.0 - a1 * a1
    v2 = 1.0 - a2 * a2
    ok = inside & (v1 > 0.0) & (v2 > 0.0)
    return np.where(ok, 0.5625 * v1 * v2, 0.0)


def _local_pairs(x, cx, cy, h, kernel, domain):
    u1 = (x - cx) / h
    u2 = (x - cy) / h
    jj = np.flatnonzero(np.abs(u1) <= _LIM)
    kk = np.flatnonzero(np.abs(u2) <= _LIM)
    J, K = np.meshgrid(jj, kk, indexing="ij")
    J = J.ravel()
    K = K.ravel()
    keep = K > J if domain == 0 else K != J
    J, K = J[keep], K[keep]
    kw = _kernel(kernel, u1[J], u2[K])
    pos = kw != 0.0
    return J[pos], K[pos], u1[J[pos]], u2[K[pos]], kw[pos]


def _monomials(u1, u2, exps, norms):
    p1 = np.power.outer(u1, np.arange(exps[:, 0].max() + 1))
    p2 = np.power.outer(u2, np.arange(exps[:, 1].max() + 1))
    return p1[:, exps[:, 0]] * p2[:, exps[:, 1]] * norms


def accumulate_grams(x, ex, ey, h, m, kernel, domain, exps, norms):
    p = x.shape[0]
    N = exps.shape[0]
    scale = 1.0 / ((p * h) * (p * h))
    grams = np.zeros((ex.shape[0], N, N))
    counts = np.zeros(ex.shape[0], dtype=np.int64)
    for e in range(ex.shape[0]):
        _, _, u1, u2, kw = _local_pairs(x, ex[e], ey[e], h, kernel, domain)
        counts[e] = kw.size
        if kw.size:
            U = _monomials(u1, u2, exps, norms)
            grams[e] = (U * (kw * scale)[:, None]).T @ U
    return grams, counts


def emit_weights(x, ex, ey, h, kernel, domain, exps, norms, order, coef, counts):
    p = x.shape[0]
    scale = 1.0 / ((p * h) * (p * h))
    rows, cols, vals = [], [], []
    for e in range(ex.shape[0]):
        mo = int(order[e])
        if mo < 0:
            continue
        n_c = (mo + 1) * (mo + 2) // 2
        J, K, u1, u2, kw = _local_pairs(x, ex[e], ey[e], h, kernel, domain)
        U = _monomials(u1, u2, exps[:n_c], norms[:n_c])
        rows.append(np.full(J.size, e, dtype=np.int64))
        if domain == 0:
            cols.append(J * p - J * (J + 1) // 2 + (K - J - 1))
        else:
            cols.append(J * (p - 1) + np.where(K < J, K, K - 1))
        vals.append((U @ coef[e, :n_c]) * kw * scale)
    if not rows:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), np.empty(0)
    return (
        np.concatenate(rows),
        np.concatenate(cols).astype(np.int64),
        np.concatenate(vals),
    )
