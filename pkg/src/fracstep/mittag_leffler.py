"""One-parameter Mittag-Leffler function E_alpha(x) on the real line.

Reference oracle for the exact solutions of the linear test problems.
Supported range: alpha in [0.1, 1], x in [-60, 5], relative error <= 1e-10.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from fracstep.errors import MlRangeError

ALPHA_MIN = 0.1
X_MIN = -60.0
X_MAX = 5.0

# |x|^(1/alpha) <= this: the alternating series loses at most ~3 digits to
# cancellation (max term ~ e^(|x|^(1/alpha))), keeping the 1e-10 budget.
_SERIES_SAFE = 4.0


@dataclass(frozen=True)
class MlQuery:
    alpha: float
    x: float

    def __post_init__(self):
        if not ALPHA_MIN <= self.alpha <= 1.0:
            raise MlRangeError(f"alpha must be in [{ALPHA_MIN}, 1], got {self.alpha}")
        if not X_MIN <= self.x <= X_MAX:
            raise MlRangeError(f"x must be in [{X_MIN}, {X_MAX}], got {self.x}")


def _series(alpha, x, max_terms=40000):
    """sum x^j / Gamma(j*alpha + 1) with compensated summation."""
    total = 0.0
    comp = 0.0
    term = 1.0
    j = 0
    while True:
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        j += 1
        if j > max_terms:
            raise MlRangeError(f"series did not converge for alpha={alpha}, x={x}")
        term *= x * math.exp(math.lgamma(j * alpha - alpha + 1.0) - math.lgamma(j * alpha + 1.0))
        if not math.isfinite(term):
            raise MlRangeError(f"E_alpha({x}) overflows double precision at alpha={alpha}")
        if abs(term) <= 1e-17 * (abs(total) + 1e-300) and j > 4:
            return total


def _spectral_integral(alpha, x):
    """E_alpha(-X) = sin(a pi)/(a pi) int_0^inf exp(-(uX)^(1/a)) /
    (u^2 + 2u cos(a pi) + 1) du, valid for 0 < alpha < 1 and X > 0."""
    X = -x
    c = math.cos(alpha * math.pi)
    pref = math.sin(alpha * math.pi) / (alpha * math.pi)
    inv = 1.0 / alpha
    lx = math.log(X)

    def f(u):
        if u <= 0.0:
            return 1.0
        e = inv * (math.log(u) + lx)
        if e > 700.0:
            return 0.0
        return math.exp(-math.exp(e)) / (u * (u + 2.0 * c) + 1.0)

    # split at the exponential cutoff and at the (near-)pole of the rational
    # factor at u = 1 so the adaptive rule sees each feature
    ucut = 40.0 ** alpha / X
    hi = max(10.0, 4.0 * ucut)
    breaks = sorted({min(ucut, hi / 2.0), 1.0, hi})
    pieces = []
    prev = 0.0
    for pt in breaks:
        if pt <= prev:
            continue
        v, _ = quad(f, prev, pt, epsabs=1e-16, epsrel=1e-13, limit=400)
        pieces.append(v)
        prev = pt
    tail, _ = quad(f, prev, np.inf, epsabs=1e-16, epsrel=1e-13, limit=400)
    pieces.append(tail)
    return pref * math.fsum(pieces)


def ml(q: MlQuery) -> float:
    """Evaluate E_alpha(x); relative error <= 1e-10 in the supported range."""
    alpha, x = q.alpha, q.x
    if alpha == 1.0:
        return math.exp(x)
    if x == 0.0:
        return 1.0
    if x < 0.0 and (-x) ** (1.0 / alpha) > _SERIES_SAFE:
        return _spectral_integral(alpha, x)
    return _series(alpha, x)


def ml_scalar(alpha: float, x: float) -> float:
    """Shorthand for ml(MlQuery(alpha, x))."""
    return ml(MlQuery(alpha=alpha, x=x))


def ml_sequence(alpha: float, lam: float, times) -> np.ndarray:
    """E_alpha(lam * t^alpha) on a time grid; the exact solution of the scalar
    linear problem with y(0) = 1 and lam <= 0."""
    if lam > 0:
        raise ValueError(f"lam must be nonpositive, got {lam}")
    times = np.asarray(times, dtype=np.float64)
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    out = np.empty(times.shape)
    flat = times.ravel()
    res = out.ravel()
    for i, t in enumerate(flat):
        res[i] = 1.0 if t == 0.0 else ml_scalar(alpha, lam * t ** alpha)
    return out
