# cython: language_level=3
"""Compiled loops for the local-polynomial weight field.

Mirrors :mod:`tricov._pycore` argument for argument. Domain code 0 keeps
pairs with j < k, code 1 keeps j != k. Kernel code 0 is uniform, 1 is the
Epanechnikov product.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs
from libc.stdlib cimport calloc, free

cnp.import_array()

cdef double SLACK = 1e-12

# polynomial order <= 30
cdef enum:
    MAX_ORDER = 31
    MAX_BASIS = 496


cdef inline double _kernel(int code, double u1, double u2) noexcept nogil:
    cdef double a1 = fabs(u1), a2 = fabs(u2)
    if a1 > 1.0 + SLACK or a2 > 1.0 + SLACK:
        return 0.0
    if code == 0:
        return 1.0
    a1 = 1.0 - a1 * a1
    a2 = 1.0 - a2 * a2
    if a1 <= 0.0 or a2 <= 0.0:
        return 0.0
    return 0.5625 * a1 * a2


cdef inline void _window(const double* x, Py_ssize_t p, double c, double h,
                         Py_ssize_t* lo, Py_ssize_t* hi) noexcept nogil:
    cdef Py_ssize_t i = 0
    while i < p and (x[i] - c) / h < -(1.0 + SLACK):
        i += 1
    lo[0] = i
    while i < p and (x[i] - c) / h <= 1.0 + SLACK:
        i += 1
    hi[0] = i


cdef inline void _monomials(int m, Py_ssize_t n_c, double u1, double u2,
                            const long* exps, const double* norms,
                            double* p1, double* p2, double* out) noexcept nogil:
    cdef Py_ssize_t l, c
    p1[0] = 1.0
    p2[0] = 1.0
    for l in range(1, m + 1):
        p1[l] = p1[l - 1] * u1
        p2[l] = p2[l - 1] * u2
    for c in range(n_c):
        out[c] = p1[exps[2 * c]] * p2[exps[2 * c + 1]] * norms[c]


def accumulate_grams(const double[::1] x, const double[::1] ex, const double[::1] ey,
                     double h, int m, int kernel, int domain,
                     const long[:, ::1] exps, const double[::1] norms):
    """Local Gram matrices ``B`` (scaled by ``(p h)^-2``) and positive-kernel pair counts."""
    cdef Py_ssize_t E = ex.shape[0], p = x.shape[0], N = exps.shape[0]
    grams_arr = np.zeros((E, N, N), dtype=np.float64)
    counts_arr = np.zeros(E, dtype=np.int64)
    cdef double[:, :, ::1] grams = grams_arr
    cdef long long[::1] counts = counts_arr
    cdef double scale = 1.0 / ((p * h) * (p * h))
    cdef double[MAX_ORDER] p1, p2
    cdef double[MAX_BASIS] U
    cdef Py_ssize_t e, j, k, jlo, jhi, klo, khi, a, b
    cdef double u1, u2, kw, ua
    cdef double* g
    if m + 1 > MAX_ORDER:
        raise ValueError("polynomial order too large for the compiled core")
    g = <double*> calloc(N * N, sizeof(double))
    if g == NULL:
        raise MemoryError()
    with nogil:
        for e in range(E):
            _window(&x[0], p, ex[e], h, &jlo, &jhi)
            _window(&x[0], p, ey[e], h, &klo, &khi)
            for j in range(jlo, jhi):
                u1 = (x[j] - ex[e]) / h
                for k in range(klo, khi):
                    if domain == 0:
                        if k <= j:
                            continue
                    elif k == j:
                        continue
                    u2 = (x[k] - ey[e]) / h
                    kw = _kernel(kernel, u1, u2)
                    if kw == 0.0:
                        continue
                    counts[e] += 1
                    _monomials(m, N, u1, u2, &exps[0, 0], &norms[0], p1, p2, U)
                    kw = kw * scale
                    for a in range(N):
                        ua = U[a] * kw
                        for b in range(a, N):
                            g[a * N + b] += ua * U[b]
            for a in range(N):
                for b in range(a, N):
                    grams[e, a, b] = g[a * N + b]
                    grams[e, b, a] = g[a * N + b]
                    g[a * N + b] = 0.0
    free(g)
    return grams_arr, counts_arr


def emit_weights(const double[::1] x, const double[::1] ex, const double[::1] ey,
                 double h, int kernel, int domain,
                 const long[:, ::1] exps, const double[::1] norms,
                 const long[::1] order, const double[:, ::1] coef,
                 const long long[::1] counts):
    """COO triplets ``(row, column, weight)`` of the weight field.

    ``order[e] < 0`` marks a hole and emits nothing. ``coef[e]`` is the first
    row of the inverse Gram matrix at the effective order, zero padded.
    """
    cdef Py_ssize_t E = ex.shape[0], p = x.shape[0]
    cdef Py_ssize_t total = 0, e
    for e in range(E):
        if order[e] >= 0:
            total += counts[e]
    rows_arr = np.empty(total, dtype=np.int64)
    cols_arr = np.empty(total, dtype=np.int64)
    vals_arr = np.empty(total, dtype=np.float64)
    cdef long long[::1] rows = rows_arr
    cdef long long[::1] cols = cols_arr
    cdef double[::1] vals = vals_arr
    cdef double scale = 1.0 / ((p * h) * (p * h))
    cdef double[MAX_ORDER] p1, p2
    cdef double[MAX_BASIS] U
    cdef Py_ssize_t j, k, jlo, jhi, klo, khi, c, n_c, pos = 0
    cdef int mo
    cdef double u1, u2, kw, s
    for e in range(E):
        if order[e] + 1 > MAX_ORDER:
            raise ValueError("polynomial order too large for the compiled core")
    with nogil:
        for e in range(E):
            mo = order[e]
            if mo < 0:
                continue
            n_c = (mo + 1) * (mo + 2) // 2
            _window(&x[0], p, ex[e], h, &jlo, &jhi)
            _window(&x[0], p, ey[e], h, &klo, &khi)
            for j in range(jlo, jhi):
                u1 = (x[j] - ex[e]) / h
                for k in range(klo, khi):
                    if domain == 0:
                        if k <= j:
                            continue
                    elif k == j:
                        continue
                    u2 = (x[k] - ey[e]) / h
                    kw = _kernel(kernel, u1, u2)
                    if kw == 0.0:
                        continue
                    _monomials(mo, n_c, u1, u2, &exps[0, 0], &norms[0], p1, p2, U)
                    s = 0.0
                    for c in range(n_c):
                        s += coef[e, c] * U[c]
                    rows[pos] = e
                    if domain == 0:
                        cols[pos] = j * p - j * (j + 1) // 2 + (k - j - 1)
                    else:
                        cols[pos] = j * (p - 1) + (k if k < j else k - 1)
                    vals[pos] = s * kw * scale
                    pos += 1
    return rows_arr, cols_arr, vals_arr
