"""BDF coefficient tables and the Taylor coefficients of their fractional powers.

The generating function of the fractional backward differentiation formula of
order p is (a_0 + a_1*z + ... + a_p*z^p)**alpha where the a_j are the usual
BDF coefficients; its Taylor coefficients omega_j are the convolution weights
of the full-memory method.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from fracstep import kernels

MAX_ORDER = 6  # BDFs are not zero-stable beyond order 6


def _exact_bdf(p):
    """Coefficients of sum_{i=1..p} (1/i)(1-z)^i as exact rationals."""
    coef = [Fraction(0)] * (p + 1)
    for i in range(1, p + 1):
        for j in range(i + 1):
            coef[j] += Fraction((-1) ** j * math.comb(i, j), i)
    return coef


_BDF_TABLES = {p: tuple(float(c) for c in _exact_bdf(p)) for p in range(1, MAX_ORDER + 1)}


@dataclass(frozen=True)
class BdfTable:
    """BDF-p coefficients a_0..a_p (a_0 > 0, sum zero)."""

    p: int
    a: tuple

    def __post_init__(self):
        if not 1 <= self.p <= MAX_ORDER:
            raise ValueError(f"BDF order must be in 1..{MAX_ORDER}, got {self.p}")
        if len(self.a) != self.p + 1:
            raise ValueError("coefficient count must be p + 1")
        if self.a[0] <= 0:
            raise ValueError("leading BDF coefficient must be positive")

    def polynomial(self):
        """Coefficients as a float array, ascending powers."""
        return np.array(self.a, dtype=np.float64)


@dataclass(frozen=True)
class GeneratingFunction:
    """BDF polynomial raised to a fractional power alpha in (0, 1)."""

    bdf: BdfTable
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class TaylorCoefficients:
    """Expansion coefficients omega_0..omega_N, read-only."""

    omega: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.omega, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "omega", arr)

    def __len__(self):
        return len(self.omega)

    def __getitem__(self, j):
        return self.omega[j]


def bdf_coefficients(p: int) -> BdfTable:
    """Standard BDF coefficients of order p (1 <= p <= 6)."""
    if not isinstance(p, (int, np.integer)) or not 1 <= p <= MAX_ORDER:
        raise ValueError(f"p must be in 1..{MAX_ORDER}, got {p!r}")
    return BdfTable(p=int(p), a=_BDF_TABLES[int(p)])


def power_series(a: np.ndarray, exponent: float, n: int) -> np.ndarray:
    """Taylor coefficients of (a_0 + ... + a_p z^p)**exponent for any real exponent.

    Coefficient k costs O(p); the whole run is O(n*p).  a_0 must be positive.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a[0] <= 0:
        raise ValueError("leading coefficient must be positive")
    if n < 0:
        raise ValueError("n must be nonnegative")
    return kernels.power_series_pow(a, float(exponent), int(n))


def genfun_taylor(gf: GeneratingFunction, n: int) -> TaylorCoefficients:
    """omega_0..omega_n of the FBDF generating function.

    The coefficients decay like j**(-alpha-1), so any n that fits in memory
    is safe.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    return TaylorCoefficients(power_series(gf.bdf.polynomial(), gf.alpha, n))


def grunwald_weights(alpha: float, n: int) -> TaylorCoefficients:
    """(-1)^j binom(alpha, j) for j = 0..n (the p = 1 case of genfun_taylor)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    return TaylorCoefficients(kernels.binomial_weights(float(alpha), int(n)))


def toeplitz_lower_apply(first_column, v) -> np.ndarray:
    """Multiply by the lower-triangular Toeplitz matrix with the given first column.

    Equivalent to the causal convolution (first_column * v) truncated to len(v).
    """
    col = np.ascontiguousarray(first_column, dtype=np.float64)
    vec = np.ascontiguousarray(v, dtype=np.float64)
    if col.size == 0 or vec.size == 0:
        raise ValueError("first_column and v must be non-empty")
    return kernels.causal_convolve(col, vec)
