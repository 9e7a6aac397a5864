"""Built-in test problems: scalar linear decay, fractional diffusion of
Nigmatullin type, and the fractional Fokker-Planck equation with Fisher
growth, both as method-of-lines semi-discretizations on interior grids."""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from fracstep.mittag_leffler import ml_sequence
from fracstep.solver import FdeProblem


@dataclass(frozen=True)
class SemiDiscretization:
    """Interior-point discretization x_i = i*delta with homogeneous Dirichlet
    boundaries folded into the tridiagonal matrix."""

    s: int
    delta: float
    matrix: np.ndarray = field(repr=False)
    y0: np.ndarray = field(repr=False)
    nonlinear: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        M = np.asarray(self.matrix, dtype=np.float64)
        if M.shape != (self.s, self.s):
            raise ValueError("matrix must be s x s")
        band = np.triu(np.tril(M, 1), -1)
        if not np.array_equal(M, band):
            raise ValueError("matrix must be tridiagonal")
        if not np.all(np.isfinite(self.y0)):
            raise ValueError("y0 must be finite")


def scalar_linear(alpha: float, lam: float) -> FdeProblem:
    """One-dimensional g(t, y) = lam*y with y(0) = 1 on [0, 1]; the exact
    solution is E_alpha(lam * t^alpha)."""
    L = np.array([[lam]])
    return FdeProblem(
        s=1,
        alpha=alpha,
        t0=0.0,
        T=1.0,
        y0=np.array([1.0]),
        rhs=lambda t, y: L @ y,
        jacobian=lambda t, y: L,
        linear_part=L,
    )


def nigmatullin(s: int, alpha: float):
    """Central-difference semi-discretization of fractional diffusion on
    (0, pi) with sine initial data.

    The initial vector is an eigenvector of the Laplacian matrix, so the exact
    solution is E_alpha(t^alpha * lam) * y0 with lam = -4 sin^2(delta/2)/delta^2.
    Returns (problem, exact) where exact maps t to the solution vector.
    """
    if s < 2:
        raise ValueError("need at least 2 interior points")
    delta = math.pi / (s + 1)
    x = delta * np.arange(1, s + 1)
    L = (np.diag(np.full(s - 1, 1.0), -1) + np.diag(np.full(s, -2.0)) + np.diag(np.full(s - 1, 1.0), 1)) / delta**2
    y0 = np.sin(x)
    lam = -4.0 * math.sin(delta / 2.0) ** 2 / delta**2
    prob = FdeProblem(
        s=s,
        alpha=alpha,
        t0=0.0,
        T=1.0,
        y0=y0,
        rhs=lambda t, y: L @ y,
        jacobian=lambda t, y: L,
        linear_part=L,
    )

    def exact(t):
        factor = ml_sequence(alpha, lam, np.atleast_1d(t))
        return factor[..., None] * y0

    return prob, exact


def fokker_planck(
    s: int,
    alpha: float,
    p_fun: Callable[[float], float],
    p_prime: Callable[[float], float],
    r: float,
    big_k: float,
    k_alpha: float,
) -> FdeProblem:
    """Fokker-Planck semi-discretization on (0, 5) with Fisher growth term
    r*y*(1 - y/K) and initial profile x^2 (5-x)^2.

    Drift p and its derivative are supplied analytically by the caller.
    """
    if s < 2:
        raise ValueError("need at least 2 interior points")
    if big_k <= 0:
        raise ValueError("carrying capacity K must be positive")
    delta = 5.0 / (s + 1)
    x = delta * np.arange(1, s + 1)
    J = np.zeros((s, s))
    for i in range(s):
        J[i, i] = p_prime(x[i]) - 2.0 * k_alpha / delta**2
    for i in range(1, s):
        J[i, i - 1] = -p_fun(x[i]) / (2.0 * delta) + k_alpha / delta**2
        J[i - 1, i] = p_fun(x[i - 1]) / (2.0 * delta) + k_alpha / delta**2
    y0 = x**2 * (5.0 - x) ** 2

    def fisher(t, y):
        return r * y * (1.0 - y / big_k)

    def rhs(t, y):
        return J @ y + fisher(t, y)

    def jac(t, y):
        return J + np.diag(r * (1.0 - 2.0 * y / big_k))

    return FdeProblem(
        s=s,
        alpha=alpha,
        t0=0.0,
        T=1.0,
        y0=y0,
        rhs=rhs,
        jacobian=jac,
        linear_part=J,
        nonlinear=fisher,
    )
