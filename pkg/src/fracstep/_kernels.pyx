# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled serial recurrences used by coefficient construction.

These loops are inherently sequential (each term depends on earlier ones),
so they cannot be vectorised with numpy; this module keeps them at C speed.
A pure-Python twin lives in fracstep._kernels_py.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def power_series_pow(double[::1] a, double c, Py_ssize_t n):
    """Taylor coefficients of (a_0 + a_1 z + ... + a_p z^p)**c, orders 0..n.

    Miller recurrence:  k*a_0*w_k = sum_{i=1..min(k,p)} (i*(c+1) - k)*a_i*w_{k-i}.
    Requires a_0 > 0.
    """
    cdef Py_ssize_t p = a.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] w = out
    cdef Py_ssize_t k, i, top
    cdef double s, a0 = a[0]
    w[0] = a0 ** c
    for k in range(1, n + 1):
        s = 0.0
        top = p if p < k else k
        for i in range(1, top + 1):
            s += (i * (c + 1.0) - k) * a[i] * w[k - i]
        w[k] = s / (k * a0)
    return out


def binomial_weights(double alpha, Py_ssize_t n):
    """(-1)^j * binom(alpha, j) for j = 0..n via the ratio recurrence."""
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] w = out
    cdef Py_ssize_t j
    w[0] = 1.0
    for j in range(1, n + 1):
        w[j] = w[j - 1] * ((j - 1 - alpha) / j)
    return out


def series_quotient(double[::1] num, double[::1] den, Py_ssize_t n):
    """Taylor coefficients of num(z)/den(z), orders 0..n.  den[0] must be nonzero."""
    cdef Py_ssize_t mnum = num.shape[0] - 1
    cdef Py_ssize_t mden = den.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(n + 1, dtype=np.float64)
    cdef double[::1] g = out
    cdef Py_ssize_t k, j, top
    cdef double s, d0 = den[0]
    for k in range(n + 1):
        s = num[k] if k <= mnum else 0.0
        top = mden if mden < k else k
        for j in range(1, top + 1):
            s -= den[j] * g[k - j]
        g[k] = s / d0
    return out


def causal_convolve(double[::1] col, double[::1] v):
    """(col * v) truncated to len(v): multiplication by the lower-triangular
    Toeplitz matrix whose first column is col."""
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t m = col.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j, top
    cdef double s
    for i in range(n):
        s = 0.0
        top = i if i < m - 1 else m - 1
        for j in range(top + 1):
            s += col[j] * v[i - j]
        o[i] = s
    return out


def pole_series(double[::1] gamma, double[::1] eta, double[::1] a, Py_ssize_t n):
    """Taylor coefficients of sum_l gamma_l / (eta_l + b(z)) with
    b(z) = a_0 + a_1 z + ... + a_p z^p, orders 0..n.

    Summing the per-pole expansions keeps every sub-recurrence well
    conditioned; expanding the partial fractions to a single polynomial
    quotient first and dividing loses the small coefficients when the poles
    cluster (small eta spread over orders of magnitude).
    """
    cdef Py_ssize_t kk = eta.shape[0]
    cdef Py_ssize_t p = a.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(n + 1, dtype=np.float64)
    cdef double[::1] acc = out
    cdef cnp.ndarray[double, ndim=1] buf = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] c = buf
    cdef Py_ssize_t l, k, i, top
    cdef double s, d0, g
    for l in range(kk):
        d0 = eta[l] + a[0]
        g = gamma[l]
        c[0] = 1.0 / d0
        for k in range(1, n + 1):
            s = 0.0
            top = p if p < k else k
            for i in range(1, top + 1):
                s += a[i] * c[k - i]
            c[k] = -s / d0
        for k in range(n + 1):
            acc[k] += g * c[k]
    return out
