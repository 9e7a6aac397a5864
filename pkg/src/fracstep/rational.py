"""Construction of the m-step method from the quadrature rule.

Pipeline: a k-point Gauss-Jacobi rule applied to the real-integral form of the
matrix fractional power gives a partial-fraction approximation
z^alpha ~ z * sum_l gamma_l/(eta_l + z); rewriting it as a polynomial quotient
and composing with the BDF polynomial yields the characteristic polynomials
p_m, q_m of an implicit m-step recursion (m = k*p).  This module also houses
the free-parameter (tau) selection rules and the componentwise error bound.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from fracstep import kernels
from fracstep.fbdf import BdfTable, bdf_coefficients, power_series, TaylorCoefficients
from fracstep.quadrature import JacobiWeight, QuadRule, gauss_jacobi_rule


@dataclass(frozen=True)
class PartialFractionForm:
    """Quadrature-derived pairs (gamma_l, eta_l): z^alpha ~ z*sum gamma_l/(eta_l+z)."""

    gamma: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)
    tau: float = 1.0
    alpha: float = 0.5
    k: int = 1

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=np.float64)
        eta = np.asarray(self.eta, dtype=np.float64)
        if len(gamma) != self.k or len(eta) != self.k:
            raise ValueError("gamma and eta must have length k")
        if np.any(gamma <= 0) or np.any(eta <= 0):
            raise ValueError("partial-fraction coefficients must be positive")
        gamma.flags.writeable = False
        eta.flags.writeable = False
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "eta", eta)

    def evaluate(self, z):
        """sum_l gamma_l/(eta_l + z), vectorised over z."""
        z = np.asarray(z, dtype=np.complex128 if np.iscomplexobj(z) else np.float64)
        return (self.gamma / (self.eta + z[..., None])).sum(axis=-1)


@dataclass(frozen=True)
class PolyQuotient:
    """Numerator/denominator coefficients (ascending) of the rational approximant.

    q_den is monic of degree k with roots exactly -eta_l; p_num has degree k-1.
    """

    p_num: np.ndarray = field(repr=False)
    q_den: np.ndarray = field(repr=False)
    tau: float = 1.0
    alpha: float = 0.5

    def __post_init__(self):
        p_num = np.asarray(self.p_num, dtype=np.float64)
        q_den = np.asarray(self.q_den, dtype=np.float64)
        if len(q_den) != len(p_num) + 1:
            raise ValueError("degrees must satisfy deg q = deg p + 1")
        if q_den[-1] != 1.0:
            raise ValueError("q must be monic")
        p_num.flags.writeable = False
        q_den.flags.writeable = False
        object.__setattr__(self, "p_num", p_num)
        object.__setattr__(self, "q_den", q_den)

    @property
    def k(self) -> int:
        return len(self.q_den) - 1

    def evaluate(self, z):
        num = np.polynomial.polynomial.polyval(z, self.p_num)
        den = np.polynomial.polynomial.polyval(z, self.q_den)
        return num / den


class MethodMeta(NamedTuple):
    p: int
    k: int
    tau: float
    alpha: float


@dataclass(frozen=True)
class StepCoefficients:
    """Coefficients alpha_j, beta_j of the m-step recursion (m = k*p)."""

    alpha_coef: np.ndarray = field(repr=False)
    beta_coef: np.ndarray = field(repr=False)
    m: int = 0
    meta: MethodMeta | None = None

    def __post_init__(self):
        ac = np.asarray(self.alpha_coef, dtype=np.float64)
        bc = np.asarray(self.beta_coef, dtype=np.float64)
        if len(ac) != self.m + 1 or len(bc) != self.m + 1:
            raise ValueError("coefficient lists must have length m + 1")
        if ac[0] <= 0:
            raise ValueError("alpha_0 must be positive")
        if bc[0] == 0:
            raise ValueError("beta_0 must be nonzero")
        scale = np.abs(ac).sum()
        if abs(ac.sum()) > 1e-12 * scale:
            raise ValueError("alpha coefficients must sum to zero (consistency)")
        ac.flags.writeable = False
        bc.flags.writeable = False
        object.__setattr__(self, "alpha_coef", ac)
        object.__setattr__(self, "beta_coef", bc)


@dataclass(frozen=True)
class ErrorReport:
    """Componentwise coefficient errors E_j and the theoretical bound column."""

    omega: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)
    E: np.ndarray = field(repr=False)
    bound: np.ndarray = field(repr=False)
    max_abs_E: float = 0.0
    bound_valid: bool = False

    def __post_init__(self):
        if not (len(self.E) == len(self.bound) == len(self.omega) == len(self.gamma)):
            raise ValueError("column lengths must match")
        if np.any(self.bound < 0):
            raise ValueError("bound entries must be nonnegative")


class TauHat(NamedTuple):
    value: float
    clamped: bool


def partial_fractions(rule: QuadRule, tau: float, alpha: float, a0: float = 1.0) -> PartialFractionForm:
    """Map quadrature nodes/weights to the partial-fraction coefficients.

    With t_l, w_l the k-point Gauss-Jacobi data for (1-t)^(alpha-1)(1+t)^(-alpha):
    eta_l = tau*(1-t_l)/(1+t_l) and gamma_l = (2 sin(alpha pi) tau^alpha / pi) *
    w_l/(1+t_l), so that z*sum gamma_l/(eta_l+z) approximates z^alpha near z=a0.
    """
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must be in (0, 1], got {tau}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if a0 <= 0:
        raise ValueError("a0 must be positive")
    t = rule.nodes
    w = rule.weights
    eta = tau * (1.0 - t) / (1.0 + t)
    gamma = (2.0 * math.sin(alpha * math.pi) * tau ** alpha / math.pi) * w / (1.0 + t)
    return PartialFractionForm(gamma=gamma, eta=eta, tau=tau, alpha=alpha, k=rule.k)


def fractional_power_pf(alpha: float, k: int, tau: float) -> PartialFractionForm:
    """Convenience: build the rule for alpha and map it in one call."""
    rule = gauss_jacobi_rule(JacobiWeight.for_fractional_power(alpha), k)
    return partial_fractions(rule, tau, alpha)


def pf_to_quotient(pf: PartialFractionForm) -> PolyQuotient:
    """Expand sum gamma_l/(eta_l+z) into a monic-denominator quotient p/q.

    q(z) = prod (z + eta_l); p(z) = sum_l gamma_l prod_{i != l} (z + eta_i).
    All eta are positive so both expansions accumulate same-sign terms.
    """
    k = pf.k
    q = np.array([1.0])
    for e in pf.eta:
        q = np.convolve(q, [e, 1.0])
    p = np.zeros(k)
    for l in range(k):
        f = np.array([pf.gamma[l]])
        for i in range(k):
            if i != l:
                f = np.convolve(f, [pf.eta[i], 1.0])
        p[: len(f)] += f
    return PolyQuotient(p_num=p, q_den=q, tau=pf.tau, alpha=pf.alpha)


def _poly_compose(outer, inner):
    """Coefficients of outer(inner(z)) by Horner in coefficient space."""
    out = np.array([outer[-1]])
    for c in outer[-2::-1]:
        out = np.convolve(out, inner)
        out[0] += c
    return out


def compose_with_bdf(pq: PolyQuotient, bdf: BdfTable) -> StepCoefficients:
    """Substitute the BDF polynomial b(zeta) into the quotient.

    alpha-coefficients are those of b(zeta)*p(b(zeta)), beta-coefficients those
    of q(b(zeta)); the alpha side sums to zero because b(1) = 0.
    """
    b = bdf.polynomial()
    alpha_coef = np.convolve(b, _poly_compose(pq.p_num, b))
    beta_coef = _poly_compose(pq.q_den, b)
    m = pq.k * bdf.p
    meta = MethodMeta(p=bdf.p, k=pq.k, tau=pq.tau, alpha=pq.alpha)
    return StepCoefficients(alpha_coef=alpha_coef, beta_coef=beta_coef, m=m, meta=meta)


def build_method(p: int, alpha: float, k: int, tau: float) -> StepCoefficients:
    """Full pipeline: quadrature -> partial fractions -> quotient -> m-step method."""
    pf = fractional_power_pf(alpha, k, tau)
    return compose_with_bdf(pf_to_quotient(pf), bdf_coefficients(p))


def rational_taylor(sc: StepCoefficients, n: int) -> TaylorCoefficients:
    """Taylor coefficients gamma_0..gamma_n of p_m/q_m from the expanded
    coefficients, by series division.

    Warning: for small tau and large k the expanded representation is badly
    conditioned (the recursion's characteristic roots cluster just outside the
    unit circle); prefer method_series, which expands pole by pole, whenever
    the originating partial fractions are known.
    """
    if sc.beta_coef[0] == 0.0:
        raise ValueError("singular method: beta_0 = 0")
    if n < 0:
        raise ValueError("n must be nonnegative")
    return TaylorCoefficients(
        kernels.series_quotient(sc.alpha_coef, sc.beta_coef, int(n))
    )


def method_series(pf: PartialFractionForm, bdf: BdfTable, n: int) -> np.ndarray:
    """Taylor coefficients of p_m/q_m computed stably from the partial fractions.

    Expands b(z)*sum_l gamma_l/(eta_l + b(z)) pole by pole; each sub-series is
    well conditioned regardless of how the eta cluster.
    """
    a = bdf.polynomial()
    t = kernels.pole_series(pf.gamma, pf.eta, a, int(n))
    out = np.zeros(n + 1)
    for i in range(bdf.p + 1):
        out[i:] += a[i] * t[: n + 1 - i]
    return out


def tau_hat(p: int, k: int, n_steps: int) -> TauHat:
    """Practical tau choice (7+p)*k/(2N), clamped into (0, 1]."""
    if k < 1 or n_steps < 1:
        raise ValueError("k and n_steps must be positive")
    bdf_coefficients(p)  # validates p
    raw = (7.0 + p) * k / (2.0 * n_steps)
    if raw > 1.0:
        return TauHat(1.0, True)
    return TauHat(raw, False)


def tau_scan(p: int, alpha: float, k: int, n_coeffs: int, grid) -> tuple:
    """Scan tau over a grid, minimising the coefficient error of the
    fractional-derivative-operator approximant.

    The objective is max_j |c_j - g_j| over j = 0..n_coeffs where c_j are the
    Taylor coefficients of b(z)^(alpha-1) and g_j those of the partial-fraction
    approximant R_k(b(z)).  For the lower-triangular Toeplitz operator this
    column-error vector determines the matrix norms (the infinity norm is its
    l1 norm); the max norm is used as the scan objective.

    Returns (tau_star, curve) with curve a list of (tau, E(tau)).
    """
    grid = [float(t) for t in np.atleast_1d(np.asarray(grid, dtype=np.float64))]
    if len(grid) == 0:
        raise ValueError("tau grid must be non-empty")
    if any(not 0.0 < t <= 1.0 for t in grid):
        raise ValueError("tau grid values must lie in (0, 1]")
    bdf = bdf_coefficients(p)
    a = bdf.polynomial()
    target = power_series(a, alpha - 1.0, n_coeffs)
    rule = gauss_jacobi_rule(JacobiWeight.for_fractional_power(alpha), k)
    curve = []
    for tau in grid:
        pf = partial_fractions(rule, tau, alpha)
        approx = kernels.pole_series(pf.gamma, pf.eta, a, int(n_coeffs))
        curve.append((tau, float(np.max(np.abs(target - approx)))))
    tau_star = min(curve, key=lambda te: te[1])[0]
    return tau_star, curve


def psi_bound(a: float, j: int, k: int) -> float:
    """Growth factor of the componentwise quadrature-error bound.

    Three regimes in j; at an exact regime boundary the smaller value is
    taken (the ranges only overlap at endpoints).
    """
    if a <= 1.0:
        raise ValueError("a must exceed 1 (tau strictly inside (0, 1))")
    if j < 0 or k < 1:
        raise ValueError("need j >= 0 and k >= 1")

    def branch1():
        ra = math.sqrt(a)
        return ra / (ra - 1.0) ** (2 * k + 2) * ((a + 1.0) / (2.0 * ra)) ** j

    def branch2():
        return (
            (math.sqrt(a + 1.0) + math.sqrt(2.0))
            * ((j - 2 * k - 1) / (4 * k + 1)) ** ((j - 1) / 2.0 - k)
            / ((j + 2 * k) / (4 * k + 1)) ** (j / 2.0 + k)
            * ((a + 1.0) / 2.0) ** j
            * (a - 1.0) ** (-2 * k - 1.5)
        )

    def branch3():
        return (
            (math.sqrt(a + 1.0) + math.sqrt(2.0))
            / (a - 1.0)
            * (a + 1.0) ** (j / 2.0 - k)
            / 2.0 ** ((j + 1) / 2.0 + k)
        )

    try:
        if j <= 2 * k + 1:
            return branch1()
        cutoff = (6 * k + 1 + a * (2 * k + 1)) / (a - 1.0)
        if j < cutoff:
            return branch2()
        if j > cutoff:
            return branch3()
        return min(branch2(), branch3())
    except OverflowError:
        return math.inf


def error_bound(alpha: float, tau: float, j: int, k: int) -> float:
    """Theoretical bound on |E_j| = |omega_j - gamma_j| for the order-1 case:
    2^(3-2k) sin(alpha pi) tau^alpha Psi(a, j, k) with a = (1+tau)/(1-tau)."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"bound requires tau in (0, 1), got {tau}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    a = (1.0 + tau) / (1.0 - tau)
    return 2.0 ** (3 - 2 * k) * math.sin(alpha * math.pi) * tau ** alpha * psi_bound(a, j, k)


def tau_opt_formula(j: int, k: int) -> float:
    """j-fixed minimiser (4k+3)/(2j) of the error bound, valid for j >= 2k+3."""
    if j < 2 * k + 3:
        raise ValueError(f"formula derived for j >= 2k+3, got j={j}, k={k}")
    return (4 * k + 3) / (2.0 * j)


def componentwise_error(p: int, alpha: float, k: int, tau: float, n: int) -> ErrorReport:
    """E_j = omega_j - gamma_j for j = 0..n, plus the theoretical bound column.

    gamma comes from the pole-by-pole expansion (method_series); the bound
    column is filled only for p = 1 with tau strictly inside (0, 1), and is
    zero (with bound_valid False) otherwise.
    """
    bdf = bdf_coefficients(p)
    pf = fractional_power_pf(alpha, k, tau)
    omega = power_series(bdf.polynomial(), alpha, n)
    gamma = method_series(pf, bdf, n)
    E = omega - gamma
    bound_valid = p == 1 and tau < 1.0
    if bound_valid:
        bound = np.array([error_bound(alpha, tau, j, k) for j in range(n + 1)])
    else:
        bound = np.zeros(n + 1)
    return ErrorReport(
        omega=omega,
        gamma=gamma,
        E=E,
        bound=bound,
        max_abs_E=float(np.max(np.abs(E))),
        bound_valid=bound_valid,
    )
