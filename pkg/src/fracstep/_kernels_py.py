"""Pure-Python twins of the compiled kernels in _kernels.pyx.

Used when the C extension is unavailable.  Same contracts, plain loops
(numpy where a vectorised form exists).
"""

import numpy as np


def power_series_pow(a, c, n):
    """Taylor coefficients of (a_0 + ... + a_p z^p)**c, orders 0..n."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    p = a.shape[0] - 1
    w = np.empty(n + 1)
    a0 = a[0]
    w[0] = a0 ** c
    for k in range(1, n + 1):
        s = 0.0
        for i in range(1, min(p, k) + 1):
            s += (i * (c + 1.0) - k) * a[i] * w[k - i]
        w[k] = s / (k * a0)
    return w


def binomial_weights(alpha, n):
    """(-1)^j * binom(alpha, j) for j = 0..n."""
    w = np.empty(n + 1)
    w[0] = 1.0
    for j in range(1, n + 1):
        w[j] = w[j - 1] * ((j - 1 - alpha) / j)
    return w


def series_quotient(num, den, n):
    """Taylor coefficients of num(z)/den(z), orders 0..n."""
    num = np.ascontiguousarray(num, dtype=np.float64)
    den = np.ascontiguousarray(den, dtype=np.float64)
    mnum = num.shape[0] - 1
    mden = den.shape[0] - 1
    g = np.zeros(n + 1)
    d0 = den[0]
    for k in range(n + 1):
        s = num[k] if k <= mnum else 0.0
        for j in range(1, min(mden, k) + 1):
            s -= den[j] * g[k - j]
        g[k] = s / d0
    return g


def causal_convolve(col, v):
    """(col * v) truncated to len(v)."""
    col = np.ascontiguousarray(col, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    return np.convolve(col, v)[: v.shape[0]]


def pole_series(gamma, eta, a, n):
    """Taylor coefficients of sum_l gamma_l / (eta_l + b(z)), orders 0..n."""
    gamma = np.ascontiguousarray(gamma, dtype=np.float64)
    eta = np.ascontiguousarray(eta, dtype=np.float64)
    a = np.ascontiguousarray(a, dtype=np.float64)
    p = a.shape[0] - 1
    if p == 1:
        # single real pole per term: geometric series, fully vectorised
        # 1/(eta + a0 + a1 z) = (1/d0) * sum_k (-a1/d0)^k z^k
        d0 = eta + a[0]
        ratio = -a[1] / d0
        powers = ratio[None, :] ** np.arange(n + 1)[:, None]
        return powers @ (gamma / d0)
    out = np.zeros(n + 1)
    c = np.empty(n + 1)
    for l in range(eta.shape[0]):
        d0 = eta[l] + a[0]
        c[0] = 1.0 / d0
        for k in range(1, n + 1):
            s = 0.0
            for i in range(1, min(p, k) + 1):
                s += a[i] * c[k - i]
            c[k] = -s / d0
        out += gamma[l] * c
    return out
