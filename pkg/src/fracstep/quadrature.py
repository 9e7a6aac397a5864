"""Gauss-Jacobi quadrature for weights (1-t)^a (1+t)^b on [-1, 1].

Nodes and weights come from the Golub-Welsch tridiagonal eigenproblem, with a
Newton polish of each node on the Jacobi three-term recurrence and weights via
the Christoffel function (reciprocal sum of squared orthonormal polynomials).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

MAX_POINTS = 64


@dataclass(frozen=True)
class JacobiWeight:
    """Exponents of (1-t)^a (1+t)^b; both must exceed -1."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > -1.0 and self.b > -1.0):
            raise ValueError(f"Jacobi exponents must exceed -1, got a={self.a}, b={self.b}")

    @classmethod
    def for_fractional_power(cls, alpha: float) -> "JacobiWeight":
        """The weight (1-t)^(alpha-1) (1+t)^(-alpha) of the fractional-power integral."""
        return cls(a=alpha - 1.0, b=-alpha)


@dataclass(frozen=True)
class QuadRule:
    """Nodes strictly increasing in (-1, 1), weights positive."""

    weight: JacobiWeight
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if np.any(nodes <= -1.0) or np.any(nodes >= 1.0) or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing inside (-1, 1)")
        if np.any(weights <= 0.0):
            raise ValueError("weights must be positive")
        mu0 = jacobi_moments(self.weight, 0)[0]
        if abs(weights.sum() - mu0) > 1e-12 * abs(mu0):
            raise ValueError("weights do not sum to the zeroth moment")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def k(self) -> int:
        return len(self.nodes)

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def _mu0(a, b):
    # 2^(a+b+1) * B(a+1, b+1)
    return 2.0 ** (a + b + 1) * math.exp(
        math.lgamma(a + 1.0) + math.lgamma(b + 1.0) - math.lgamma(a + b + 2.0)
    )


def jacobi_moments(w: JacobiWeight, m: int) -> np.ndarray:
    """Monomial moments mu_r = int t^r (1-t)^a (1+t)^b dt for r = 0..m.

    mu_0 from the Beta function, mu_1 analytically, the rest by the stable
    three-term recurrence obtained from integrating the exact derivative
    d/dt [t^(r+1) (1-t)^(a+1) (1+t)^(b+1)].
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    a, b = w.a, w.b
    mu = np.empty(m + 1)
    mu[0] = _mu0(a, b)
    if m >= 1:
        mu[1] = (b - a) / (a + b + 2.0) * mu[0]
    for r in range(m - 1):
        mu[r + 2] = ((r + 1) * mu[r] + (b - a) * mu[r + 1]) / (r + a + b + 3.0)
    return mu


def _recurrence(a, b, k):
    """Diagonal and off-diagonal of the k x k Jacobi matrix (monic recurrence)."""
    diag = np.empty(k)
    offsq = np.empty(k)  # beta_r; offsq[0] = mu_0 by convention
    s = a + b
    diag[0] = (b - a) / (s + 2.0)
    offsq[0] = _mu0(a, b)
    for r in range(1, k):
        den = (2.0 * r + s) * (2.0 * r + s + 2.0)
        diag[r] = (b * b - a * a) / den
        if r == 1:
            offsq[r] = 4.0 * (a + 1.0) * (b + 1.0) / ((s + 2.0) ** 2 * (s + 3.0))
        else:
            offsq[r] = (
                4.0 * r * (r + a) * (r + b) * (r + s)
                / ((2.0 * r + s) ** 2 * (2.0 * r + s + 1.0) * (2.0 * r + s - 1.0))
            )
    return diag, offsq


def _orthopoly_sequence(diag, off, x, k):
    """Values and derivatives of the (p_0 = 1 scaled) orthonormal sequence
    p_0..p_k at x, using b_{r+1} p_{r+1} = (x - a_r) p_r - b_r p_{r-1}."""
    p = np.empty(k + 1)
    dp = np.empty(k + 1)
    p[0], dp[0] = 1.0, 0.0
    p[1] = (x - diag[0]) / off[0]
    dp[1] = 1.0 / off[0]
    for r in range(1, k):
        p[r + 1] = ((x - diag[r]) * p[r] - off[r - 1] * p[r - 1]) / off[r]
        dp[r + 1] = (p[r] + (x - diag[r]) * dp[r] - off[r - 1] * dp[r - 1]) / off[r]
    return p, dp


def gauss_jacobi_rule(w: JacobiWeight, k: int) -> QuadRule:
    """k-point rule exact to degree 2k-1 against the Jacobi weight."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > MAX_POINTS:
        raise ValueError(f"k capped at {MAX_POINTS}")
    diag, offsq = _recurrence(w.a, w.b, k + 1)
    mu0 = offsq[0]
    off = np.sqrt(offsq[1:])  # off[r] multiplies p_{r+1}
    nodes = eigh_tridiagonal(diag[:k], off[: k - 1], eigvals_only=True)

    weights = np.empty(k)
    for i in range(k):
        x = nodes[i]
        for _ in range(2):  # Newton polish on p_k
            p, dp = _orthopoly_sequence(diag, off, x, k)
            if dp[k] == 0.0:
                break
            step = p[k] / dp[k]
            x -= step
            if abs(step) < 4e-16 * (1.0 + abs(x)):
                break
        nodes[i] = x
        p, _ = _orthopoly_sequence(diag, off, x, k)
        weights[i] = mu0 / np.dot(p[:k], p[:k])  # Christoffel function

    order = np.argsort(nodes)
    return QuadRule(weight=w, nodes=nodes[order], weights=weights[order])
