"""Stability and consistency diagnostics for the constructed methods.

Boundary loci of absolute-stability regions, zero-stability certification of
the characteristic polynomials (with the Jacobi-root cross-check), and the
three consistency indicators compared against 1.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from fracstep.errors import StabilityViolationError
from fracstep.fbdf import bdf_coefficients, grunwald_weights
from fracstep.mittag_leffler import ml_sequence
from fracstep.quadrature import JacobiWeight, gauss_jacobi_rule
from fracstep.rational import (
    StepCoefficients,
    build_method,
    fractional_power_pf,
    method_series,
)


@dataclass(frozen=True)
class StabilityBoundary:
    """Image of the unit circle under the method's generating function; the
    stability region is the complement of the enclosed set."""

    theta: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    variant: str = "kstep"

    def __post_init__(self):
        if len(self.theta) != len(self.points):
            raise ValueError("theta and points must have equal length")
        self.theta.flags.writeable = False
        self.points.flags.writeable = False


@dataclass(frozen=True)
class RootReport:
    """Roots of the characteristic polynomials plus the Jacobi cross-check."""

    p_roots: np.ndarray = field(repr=False)
    q_roots: np.ndarray = field(repr=False)
    crosscheck_residual: float = math.nan


@dataclass(frozen=True)
class ConsistencyCurve:
    """Diagnostic values over a step-size grid; +inf marks an exactly zero
    log argument."""

    h_values: np.ndarray = field(repr=False)
    q_values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.h_values) != len(self.q_values):
            raise ValueError("grid and values must have equal length")
        d = np.diff(self.h_values)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("h grid must be strictly monotone")


def _deflate_unit_root(coeffs):
    """Quotient of a polynomial by (1 - zeta); the remainder (the value at 1,
    zero for consistent methods) is dropped."""
    m = len(coeffs) - 1
    c = np.empty(m)
    c[0] = coeffs[0]
    for j in range(1, m):
        c[j] = coeffs[j] + c[j - 1]
    return c


def stability_boundary(sc: StepCoefficients, n_theta: int) -> StabilityBoundary:
    """Sample p_m(e^(i theta))/q_m(e^(i theta)) on a uniform angle grid.

    p_m is evaluated in the factored form (1-zeta)*c(zeta) so the image of
    theta = 0 is exactly zero.
    """
    if n_theta < 8:
        raise ValueError("n_theta must be at least 8")
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    z = np.exp(1j * theta)
    c = _deflate_unit_root(sc.alpha_coef)
    num = (1.0 - z) * np.polynomial.polynomial.polyval(z, c)
    den = np.polynomial.polynomial.polyval(z, sc.beta_coef)
    if np.any(den == 0.0):
        raise StabilityViolationError([], "q_m vanishes on the unit circle")
    return StabilityBoundary(theta=theta, points=num / den, variant="kstep")


def fbdf_boundary(p: int, alpha: float, n_theta: int) -> StabilityBoundary:
    """Boundary locus of the order-p FBDF: (a_0 + ... + a_p e^(ip theta))^alpha.

    Evaluated in closed form (principal power); the BDF locus avoids the
    negative real axis for p <= 6, so the branch is continuous and the
    theta = 0 image is exactly zero.
    """
    if n_theta < 8:
        raise ValueError("n_theta must be at least 8")
    a = bdf_coefficients(p).polynomial()
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    z = np.exp(1j * theta)
    b = np.polynomial.polynomial.polyval(z, a)
    points = np.array([0.0 if v == 0 else cmath.exp(alpha * cmath.log(v)) for v in b])
    return StabilityBoundary(theta=theta, points=points, variant="fbdf")


def _bdf_preimages(bdf_poly, value):
    """Roots zeta of b(zeta) = -value for a single positive value."""
    shifted = bdf_poly.copy()
    shifted[0] += value
    roots = np.polynomial.polynomial.polyroots(shifted)
    # one Newton polish on the small polynomial
    dcoef = shifted[1:] * np.arange(1, len(shifted))
    for _ in range(2):
        vals = np.polynomial.polynomial.polyval(roots, shifted)
        ders = np.polynomial.polynomial.polyval(roots, dcoef)
        mask = ders != 0
        roots[mask] -= vals[mask] / ders[mask]
    return roots


def _ptilde_roots(pf):
    """Roots of p~(z) = sum_l gamma_l prod_{i!=l}(z + eta_i): companion start,
    then Newton on the stable sum-of-products evaluation."""
    k = pf.k
    if k == 1:
        return np.empty(0, dtype=complex)
    coeffs = np.zeros(k)
    for l in range(k):
        f = np.array([pf.gamma[l]])
        for i in range(k):
            if i != l:
                f = np.convolve(f, [pf.eta[i], 1.0])
        coeffs[: len(f)] += f
    roots = np.polynomial.polynomial.polyroots(coeffs).astype(complex)
    gamma, eta = pf.gamma, pf.eta
    for _ in range(60):
        vals = np.zeros(k - 1, dtype=complex)
        ders = np.zeros(k - 1, dtype=complex)
        for l in range(k):
            pr = np.full(k - 1, gamma[l], dtype=complex)
            dr = np.zeros(k - 1, dtype=complex)
            for i in range(k):
                if i == l:
                    continue
                dr = dr * (roots + eta[i]) + pr
                pr = pr * (roots + eta[i])
            vals += pr
            ders += dr
        mask = ders != 0
        step = np.zeros_like(roots)
        step[mask] = vals[mask] / ders[mask]
        roots -= step
        if np.max(np.abs(step)) < 1e-15 * (1.0 + np.max(np.abs(roots))):
            break
    return roots


def _method_roots(sc: StepCoefficients):
    """Roots of p_m and q_m.

    With construction metadata available the roots come from the factored form
    (preimages of the partial-fraction poles through the BDF polynomial);
    the expanded coefficients do not determine clustered roots accurately.
    Falls back to companion + Horner polish for metadata-free coefficients.
    """
    if sc.meta is not None:
        p, k, tau, alpha = sc.meta
        bdf_poly = bdf_coefficients(p).polynomial()
        pf = fractional_power_pf(alpha, k, tau)
        q_roots = np.concatenate([_bdf_preimages(bdf_poly, e) for e in pf.eta])
        # p_m = b * p~(b): roots of b itself, plus preimages of p~'s roots
        p_roots = [np.polynomial.polynomial.polyroots(bdf_poly)]
        for z in _ptilde_roots(pf):
            p_roots.append(_bdf_preimages(bdf_poly, -z))
        return np.concatenate(p_roots), q_roots

    def _companion(coeffs):
        roots = np.polynomial.polynomial.polyroots(coeffs).astype(complex)
        dcoef = coeffs[1:] * np.arange(1, len(coeffs))
        for _ in range(2):
            vals = np.polynomial.polynomial.polyval(roots, coeffs)
            ders = np.polynomial.polynomial.polyval(roots, dcoef)
            mask = ders != 0
            roots[mask] -= vals[mask] / ders[mask]
        return roots

    return _companion(sc.alpha_coef), _companion(sc.beta_coef)


def _pair_distance(numeric, reference):
    """Max distance after sorted pairing (roots here are real for p = 1)."""
    a = np.sort_complex(np.asarray(numeric, dtype=complex))
    b = np.sort_complex(np.asarray(reference, dtype=complex))
    if len(a) != len(b):
        return math.inf
    return float(np.max(np.abs(a - b))) if len(a) else 0.0


def _mapped_jacobi_roots(k, alpha, tau):
    """Images 1 + tau*(1-x)/(1+x) of the two Jacobi root families."""
    q_nodes = gauss_jacobi_rule(JacobiWeight(alpha - 1.0, -alpha), k).nodes
    mapped_q = 1.0 + tau * (1.0 - q_nodes) / (1.0 + q_nodes)
    if k > 1:
        p_nodes = gauss_jacobi_rule(JacobiWeight(1.0 - alpha, alpha), k - 1).nodes
        mapped_p = 1.0 + tau * (1.0 - p_nodes) / (1.0 + p_nodes)
    else:
        mapped_p = np.empty(0)
    mapped_p = np.concatenate([mapped_p, [1.0]])
    return mapped_p, mapped_q


def zero_stability_check(sc: StepCoefficients) -> RootReport:
    """Certify the root condition: every q_m root outside the closed unit
    disk; p_m roots are zeta = 1 (simple) plus roots outside the disk.

    Equivalently the adjoint polynomials are Von Neumann / Schur.  Raises
    StabilityViolationError listing the offending roots otherwise.
    """
    p_roots, q_roots = _method_roots(sc)
    bad_q = q_roots[np.abs(q_roots) <= 1.0]
    if len(bad_q):
        raise StabilityViolationError(bad_q, f"q_m roots inside the closed unit disk: {bad_q}")
    near_one = np.abs(p_roots - 1.0) <= 1e-8
    if near_one.sum() != 1:
        raise StabilityViolationError(
            p_roots, f"expected a simple p_m root at 1, found {near_one.sum()}"
        )
    others = p_roots[~near_one]
    bad_p = others[np.abs(others) <= 1.0]
    if len(bad_p):
        raise StabilityViolationError(bad_p, f"p_m roots inside the closed unit disk: {bad_p}")

    residual = math.nan
    if sc.meta is not None and sc.meta.p == 1:
        mapped_p, mapped_q = _mapped_jacobi_roots(sc.meta.k, sc.meta.alpha, sc.meta.tau)
        residual = max(_pair_distance(p_roots, mapped_p), _pair_distance(q_roots, mapped_q))
    return RootReport(p_roots=p_roots, q_roots=q_roots, crosscheck_residual=residual)


def jacobi_root_crosscheck(k: int, alpha: float, tau: float) -> float:
    """Max sorted-pairing distance between the numerically computed p/q roots
    of the order-1 method and the mapped Jacobi-polynomial roots."""
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must be in (0, 1], got {tau}")
    sc = build_method(1, alpha, k, tau)
    p_roots, q_roots = _method_roots(sc)
    mapped_p, mapped_q = _mapped_jacobi_roots(k, alpha, tau)
    return max(_pair_distance(p_roots, mapped_p), _pair_distance(q_roots, mapped_q))


def _log_h(value, h):
    if value == 0.0:
        return math.inf
    return math.log(value) / math.log(h)


def _as_grid(h_grid):
    h = np.asarray(h_grid, dtype=np.float64)
    if np.any(h <= 0):
        raise ValueError("h grid must be positive")
    return h


def consistency_qk(alpha: float, tau: float, k: int, h_grid) -> ConsistencyCurve:
    """q_k(h) = log_h(h^-alpha |R_k(e^-h) - (1 - e^-h)^alpha|); consistency of
    the order-1 FBDF is simulated well while the value stays above 1."""
    h = _as_grid(h_grid)
    pf = fractional_power_pf(alpha, k, tau)
    vals = np.empty(len(h))
    for i, hi in enumerate(h):
        b = -math.expm1(-hi)  # 1 - e^-h
        r = b * float(pf.evaluate(np.array(b)))
        vals[i] = _log_h(hi ** (-alpha) * abs(r - b ** alpha), hi)
    return ConsistencyCurve(h_values=h, q_values=vals)


def _weight_gap(alpha, tau, k, n):
    """(-1)^j binom(alpha, j) - gamma_{j,k} for j = 0..n."""
    w = grunwald_weights(alpha, n).omega
    gam = method_series(fractional_power_pf(alpha, k, tau), bdf_coefficients(1), n)
    return w - gam


def _steps_of(h):
    n = round(1.0 / h)
    if abs(n * h - 1.0) > 1e-9:
        raise ValueError(f"h must be of the form 1/N, got {h}")
    return n


def consistency_qtilde(alpha: float, tau: float, k: int, h_grid) -> ConsistencyCurve:
    """Indicator weighted by the sampled solution y(t) = E_alpha(-t^alpha):
    log_h of h^-alpha |sum_j (w_j - gamma_j)(y(t_{N-j}) - y(0))| at t = 1."""
    h = _as_grid(h_grid)
    vals = np.empty(len(h))
    for i, hi in enumerate(h):
        n = _steps_of(hi)
        gap = _weight_gap(alpha, tau, k, n)
        t = np.linspace(0.0, 1.0, n + 1)
        y = ml_sequence(alpha, -1.0, t)
        s = float(np.dot(gap, y[::-1] - y[0]))
        vals[i] = _log_h(hi ** (-alpha) * abs(s), hi)
    return ConsistencyCurve(h_values=h, q_values=vals)


def consistency_qbar(alpha: float, tau: float, k: int, h_grid) -> ConsistencyCurve:
    """Worst-case indicator log_h(h^-alpha sum_j |w_j - gamma_j|) under the
    bounded-solution assumption."""
    h = _as_grid(h_grid)
    vals = np.empty(len(h))
    for i, hi in enumerate(h):
        n = _steps_of(hi)
        gap = _weight_gap(alpha, tau, k, n)
        vals[i] = _log_h(hi ** (-alpha) * float(np.sum(np.abs(gap))), hi)
    return ConsistencyCurve(h_values=h, q_values=vals)
