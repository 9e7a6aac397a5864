"""Time-stepping engines for Caputo fractional differential equations.

Both solvers march the deviation d_n = y_n - y_0 (the natural unknown of the
memory term): the k*p-step method with its self-starting phase, and the
full-memory FBDF reference.  Each implicit step solves
alpha_0*d - h^alpha*beta_0*g(t, y_0 + d) = r by a prefactored linear solve
when the problem is linear and by damped Newton otherwise.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from fracstep.errors import NewtonConvergenceError
from fracstep.fbdf import bdf_coefficients, power_series
from fracstep.rational import StepCoefficients

NEWTON_MAX_ITER = 25
NEWTON_TOL = 1e-12
NEWTON_MAX_HALVINGS = 4


@dataclass(frozen=True)
class FdeProblem:
    """Caputo initial-value problem D^alpha y = g(t, y), y(t0) = y0.

    linear_part declares rhs(t, y) = L @ y + nonlinear(t, y) (remainder
    optional); with no remainder the solvers use a prefactored direct solve.
    alpha = 1 is admitted for the classical-limit checks.
    """

    s: int
    alpha: float
    t0: float
    T: float
    y0: np.ndarray = field(repr=False)
    rhs: Callable = field(repr=False)
    jacobian: Optional[Callable] = field(default=None, repr=False)
    linear_part: Optional[np.ndarray] = field(default=None, repr=False)
    nonlinear: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("state dimension must be positive")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not self.T > self.t0:
            raise ValueError("need T > t0")
        y0 = np.ascontiguousarray(self.y0, dtype=np.float64)
        if y0.shape != (self.s,):
            raise ValueError(f"y0 must have shape ({self.s},)")
        y0.flags.writeable = False
        object.__setattr__(self, "y0", y0)
        if self.linear_part is not None:
            L = np.ascontiguousarray(self.linear_part, dtype=np.float64)
            if L.shape != (self.s, self.s):
                raise ValueError("linear_part must be s x s")
            L.flags.writeable = False
            object.__setattr__(self, "linear_part", L)
            rng = np.random.default_rng(0)
            for _ in range(3):
                t = self.t0 + rng.random() * (self.T - self.t0)
                y = y0 + rng.standard_normal(self.s)
                model = L @ y
                if self.nonlinear is not None:
                    model = model + self.nonlinear(t, y)
                ref = self.rhs(t, y)
                scale = max(1.0, float(np.max(np.abs(ref))))
                if np.max(np.abs(model - ref)) > 1e-10 * scale:
                    raise ValueError("linear_part (+ nonlinear) is inconsistent with rhs")

    @property
    def fully_linear(self) -> bool:
        return self.linear_part is not None and self.nonlinear is None


@dataclass(frozen=True)
class Trajectory:
    """Uniform-mesh solver output; states[0] is the initial value."""

    times: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times.flags.writeable = False
        self.states.flags.writeable = False

    @property
    def h(self) -> float:
        return float(self.times[1] - self.times[0])


def _newton_deviation(alpha0, coef, rhs, jacobian, t, y0, r, d_init, lu=None):
    """Solve alpha0*d - coef*g(t, y0+d) = r by damped Newton.

    lu, when given, is the prefactored constant Jacobian alpha0*I - coef*L.
    Returns (d, iterations).
    """
    s = len(r)
    d = np.array(d_init, dtype=np.float64)
    g = np.asarray(rhs(t, y0 + d), dtype=np.float64)
    F = alpha0 * d - coef * g - r
    nf = float(np.max(np.abs(F)))
    for it in range(NEWTON_MAX_ITER):
        scale = (
            1.0
            + float(np.max(np.abs(r)))
            + abs(alpha0) * float(np.max(np.abs(y0 + d)))
            + abs(coef) * float(np.max(np.abs(g)))
        )
        if nf <= NEWTON_TOL * scale:
            return d, it
        if lu is not None:
            step = lu_solve(lu, F)
        else:
            if jacobian is not None:
                Jg = np.asarray(jacobian(t, y0 + d), dtype=np.float64)
            else:
                Jg = _fd_jacobian(rhs, t, y0 + d)
            A = alpha0 * np.eye(s) - coef * Jg
            step = np.linalg.solve(A, F)
        lam = 1.0
        for _ in range(NEWTON_MAX_HALVINGS + 1):
            d_new = d - lam * step
            g_new = np.asarray(rhs(t, y0 + d_new), dtype=np.float64)
            F_new = alpha0 * d_new - coef * g_new - r
            nf_new = float(np.max(np.abs(F_new)))
            if nf_new < nf or lam <= 1.0 / 2 ** NEWTON_MAX_HALVINGS:
                break
            lam *= 0.5
        d, g, F, nf = d_new, g_new, F_new, nf_new
    raise NewtonConvergenceError(step=None, residual=nf)


def _fd_jacobian(rhs, t, y):
    s = len(y)
    g0 = np.asarray(rhs(t, y), dtype=np.float64)
    J = np.empty((s, s))
    for i in range(s):
        eps = 1e-8 * max(1.0, abs(y[i]))
        yp = y.copy()
        yp[i] += eps
        J[:, i] = (np.asarray(rhs(t, yp), dtype=np.float64) - g0) / eps
    return J


def implicit_step(alpha0, beta0, h, alpha_exp, rhs, jacobian, t_n, r):
    """Solve alpha_0*y - h^alpha*beta_0*g(t_n, y) = r for y.

    Pure linear g converges in one Newton iteration; the residual contract is
    max-norm <= 1e-12 * (1 + |r|)-level mixed with the equation's term scale.
    """
    if alpha0 == 0.0:
        raise ValueError("alpha_0 must be nonzero")
    r = np.atleast_1d(np.asarray(r, dtype=np.float64))
    y, _ = _newton_deviation(
        alpha0, h ** alpha_exp * beta0, rhs, jacobian, t_n, np.zeros_like(r), r, r / alpha0
    )
    return y


def _step_context(prob, n_steps):
    h = (prob.T - prob.t0) / n_steps
    times = prob.t0 + h * np.arange(n_steps + 1)
    return h, times


def _linear_lu(prob, alpha0, coef):
    if not prob.fully_linear:
        return None
    return lu_factor(alpha0 * np.eye(prob.s) - coef * prob.linear_part)


def iter_kstep(prob: FdeProblem, sc: StepCoefficients, n_steps: int, stats: dict | None = None):
    """Generator over (n, t_n, y_n) for the m-step method; keeps only the last
    m deviations and right-hand sides (peak extra memory O(m*s)).

    Steps 1..m use the growing self-start recursion; later steps the fixed
    m-term window.  Yields the initial state first.  When a stats dict is
    supplied, Newton counters are written into it as the generator drains.
    """
    ac = sc.alpha_coef
    bc = sc.beta_coef
    m = sc.m
    if n_steps < m:
        raise ValueError(f"need at least m={m} steps, got {n_steps}")
    if bc[0] == 0.0:
        raise ValueError("singular method: beta_0 = 0")
    h, times = _step_context(prob, n_steps)
    ha = h ** prob.alpha
    coef = ha * bc[0]
    lu = _linear_lu(prob, ac[0], coef)
    y0 = prob.y0
    width = m + 1
    D = np.zeros((width, prob.s))
    G = np.zeros((width, prob.s))
    G[0] = prob.rhs(times[0], y0)
    newton_total = 0
    yield 0, times[0], y0.copy()
    d_prev = np.zeros(prob.s)
    for n in range(1, n_steps + 1):
        W = min(n - 1, m)
        if W > 0:
            idx = (n - np.arange(1, W + 1)) % width
            r = ha * (bc[1 : W + 1] @ G[idx]) - (ac[1 : W + 1] @ D[idx])
        else:
            r = np.zeros(prob.s)
        try:
            d, its = _newton_deviation(
                ac[0], coef, prob.rhs, prob.jacobian, times[n], y0, r, d_prev, lu=lu
            )
        except NewtonConvergenceError as exc:
            raise NewtonConvergenceError(step=n, residual=exc.residual) from None
        newton_total += its
        slot = n % width
        D[slot] = d
        G[slot] = prob.rhs(times[n], y0 + d)
        d_prev = d
        if stats is not None:
            stats["newton_iterations"] = newton_total
        yield n, times[n], y0 + d


def solve_kstep(prob: FdeProblem, sc: StepCoefficients, n_steps: int) -> Trajectory:
    """Run the m-step method and collect the dense trajectory."""
    states = np.empty((n_steps + 1, prob.s))
    times = np.empty(n_steps + 1)
    stats = {"newton_iterations": 0}
    for n, t, y in iter_kstep(prob, sc, n_steps, stats=stats):
        times[n] = t
        states[n] = y
    meta = {
        "method": "kstep",
        "m": sc.m,
        "meta": sc.meta,
        "newton_iterations": stats["newton_iterations"],
    }
    return Trajectory(times=times, states=states, meta=meta)


def solve_fbdf(prob: FdeProblem, p: int, n_steps: int) -> Trajectory:
    """Full-memory FBDF of order p (no starting-term correction)."""
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    bdf = bdf_coefficients(p)
    omega = power_series(bdf.polynomial(), prob.alpha, n_steps)
    h, times = _step_context(prob, n_steps)
    ha = h ** prob.alpha
    lu = _linear_lu(prob, omega[0], ha)
    y0 = prob.y0
    D = np.zeros((n_steps + 1, prob.s))
    states = np.empty((n_steps + 1, prob.s))
    states[0] = y0
    newton_total = 0
    d_prev = np.zeros(prob.s)
    for n in range(1, n_steps + 1):
        if n > 1:
            r = -(omega[1:n] @ D[n - 1 : 0 : -1])
        else:
            r = np.zeros(prob.s)
        try:
            d, its = _newton_deviation(
                omega[0], ha, prob.rhs, prob.jacobian, times[n], y0, r, d_prev, lu=lu
            )
        except NewtonConvergenceError as exc:
            raise NewtonConvergenceError(step=n, residual=exc.residual) from None
        newton_total += its
        D[n] = d
        states[n] = y0 + d
        d_prev = d
    meta = {"method": "fbdf", "p": p, "newton_iterations": newton_total}
    return Trajectory(times=times, states=states, meta=meta)
