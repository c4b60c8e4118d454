"""Batch and stochastic minimizers over value/gradient objectives.

All batch solvers (gradient descent, nonlinear conjugate gradient, L-BFGS,
trust-region Newton) share the stopping rule ``||grad|| <= tol * max(1,
||grad0||)`` and record a per-iteration trace.  The line search drives the
step toward the one-dimensional minimizer by expanding while the slope stays
negative, then zooming; every accepted step satisfies the strong Wolfe
conditions.  The trust-region solver needs only Hessian-vector products,
solved inside the radius by truncated conjugate gradient.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

SOLVER_KINDS = ("gd", "cg", "qn", "tron", "sgd")


class NumericError(RuntimeError):
    """Objective became non-finite; carries the partial trace."""

    def __init__(self, message, trace=None, beta=None):
        super().__init__(message)
        self.trace = trace
        self.beta = beta


class LineSearchError(RuntimeError):
    """Non-descent direction or no acceptable step within the trial budget."""


@dataclass(frozen=True)
class SolverConfig:
    solver: str = "tron"
    max_iter: int = 10000
    max_epochs: int = 100
    grad_tol: float = 1e-4
    c1: float = 1e-4
    c2: float = 0.9
    memory: int = 10
    tron_eta0: float = 1e-4
    tron_sigma1: float = 0.25
    tron_sigma2: float = 0.5
    tron_sigma3: float = 4.0
    sgd_eta0: float = 0.1
    sgd_decay: float = 1e-3
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.solver not in SOLVER_KINDS:
            raise ValueError(f"unknown solver {self.solver!r}; "
                             f"choose from {SOLVER_KINDS}")
        if not (0.0 < self.c1 < self.c2 < 1.0):
            raise ValueError("need 0 < c1 < c2 < 1")
        if not (self.tron_sigma1 < self.tron_sigma2 < 1.0 < self.tron_sigma3):
            raise ValueError("need sigma1 < sigma2 < 1 < sigma3")
        if self.grad_tol <= 0 or self.sgd_eta0 <= 0:
            raise ValueError("tolerances and step sizes must be positive")
        if self.max_iter < 1 or self.max_epochs < 1 or self.memory < 1 \
                or self.batch_size < 1:
            raise ValueError("iteration/memory/batch limits must be >= 1")


@dataclass
class SolverTrace:
    """Per-outer-iteration record; row 0 is the starting point."""

    objective: list[float] = field(default_factory=list)
    grad_norm: list[float] = field(default_factory=list)
    step: list[float] = field(default_factory=list)
    accepted: list[bool] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    stop_reason: str = ""

    def record(self, objective, grad_norm, step, accepted, seconds):
        self.objective.append(float(objective))
        self.grad_norm.append(float(grad_norm))
        self.step.append(float(step))
        self.accepted.append(bool(accepted))
        self.seconds.append(float(seconds))

    @property
    def n_iterations(self) -> int:
        """Iterations beyond the starting point."""
        return max(0, len(self.objective) - 1)

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("iteration,objective,grad_norm,step,cumulative_seconds\n")
            for i in range(len(self.objective)):
                fh.write(f"{i},{self.objective[i]!r},{self.grad_norm[i]!r},"
                         f"{self.step[i]!r},{self.seconds[i]!r}\n")


def _tolerance(g0_norm: float, grad_tol: float) -> float:
    return grad_tol * max(1.0, g0_norm)


# ---------------------------------------------------------------------------
# Line search (strong Wolfe, pushed toward the 1-D minimizer)
# ---------------------------------------------------------------------------

def line_search(objective, beta, direction, *, f0=None, g0=None,
                c1=1e-4, c2=0.9, max_trials=50):
    """Step size along a descent direction satisfying strong Wolfe conditions.

    Starts at 1 and keeps expanding while the directional derivative stays
    negative, so the accepted step approximates argmin_eta f(beta + eta*d)
    rather than the first acceptable point.  Returns ``(eta, f_new, g_new)``
    evaluated at ``beta + eta * direction``.
    """
    beta = np.asarray(beta, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    if f0 is None or g0 is None:
        f0, g0 = objective.value_grad(beta)
    dphi0 = float(g0 @ direction)
    if dphi0 >= 0.0:
        raise LineSearchError("search direction is not a descent direction")
    evals = 0

    def phi(alpha):
        nonlocal evals
        if evals >= max_trials:
            raise LineSearchError(f"line search stalled after {evals} trials")
        evals += 1
        f, g = objective.value_grad(beta + alpha * direction)
        return f, g, float(g @ direction)

    def armijo(alpha, f):
        return f <= f0 + c1 * alpha * dphi0

    def zoom(alo, flo, dlo, glo, ahi, fhi):
        # Invariant: alo satisfies Armijo with the lowest f seen, and the
        # minimizer lies between alo and ahi (dlo * (ahi - alo) < 0).
        while True:
            width = ahi - alo
            if abs(width) <= 1e-14 * max(1.0, abs(alo)):
                if alo > 0.0:
                    return alo, flo, glo
                raise LineSearchError("line search interval collapsed")
            denom = 2.0 * (fhi - flo - dlo * width)
            at = alo - dlo * width * width / denom if np.isfinite(denom) \
                and denom != 0.0 else alo + 0.5 * width
            lo_b, hi_b = min(alo, ahi), max(alo, ahi)
            margin = 0.1 * (hi_b - lo_b)
            if not (lo_b + margin <= at <= hi_b - margin):
                at = alo + 0.5 * width
            f, g, dphi = phi(at)
            if not np.isfinite(f) or not armijo(at, f) or f >= flo:
                ahi, fhi = at, f
            else:
                if abs(dphi) <= -c2 * dphi0:
                    return at, f, g
                if dphi * width >= 0.0:
                    ahi, fhi = alo, flo
                alo, flo, dlo, glo = at, f, dphi, g

    alpha_prev, f_prev, dphi_prev, g_prev = 0.0, float(f0), dphi0, g0
    alpha = 1.0
    while True:
        f, g, dphi = phi(alpha)
        if not np.isfinite(f) or not armijo(alpha, f) \
                or (alpha_prev > 0.0 and f >= f_prev):
            return zoom(alpha_prev, f_prev, dphi_prev, g_prev, alpha, f)
        if dphi >= 0.0:
            if abs(dphi) <= -c2 * dphi0:
                return alpha, f, g
            return zoom(alpha, f, dphi, g, alpha_prev, f_prev)
        alpha_prev, f_prev, dphi_prev, g_prev = alpha, f, dphi, g
        alpha *= 2.0


# ---------------------------------------------------------------------------
# Batch solvers
# ---------------------------------------------------------------------------

def _start(objective, beta0, config):
    beta = np.array(beta0, dtype=np.float64)
    trace = SolverTrace()
    t0 = time.perf_counter()
    f, g = objective.value_grad(beta)
    if not np.isfinite(f):
        raise NumericError("objective is non-finite at the starting point",
                           trace=trace, beta=beta)
    gn = float(np.linalg.norm(g))
    trace.record(f, gn, 0.0, True, time.perf_counter() - t0)
    return beta, f, g, gn, _tolerance(gn, config.grad_tol), trace, t0


def gradient_descent(objective, beta0, config: SolverConfig = SolverConfig("gd")):
    """Steepest descent with Wolfe line search."""
    beta, f, g, gn, tol, trace, t0 = _start(objective, beta0, config)
    trace.stop_reason = "max_iterations"
    for _ in range(config.max_iter):
        if gn <= tol:
            trace.stop_reason = "gradient_tolerance"
            break
        d = -g
        try:
            alpha, f, g = line_search(objective, beta, d, f0=f, g0=g,
                                      c1=config.c1, c2=config.c2)
        except LineSearchError:
            trace.stop_reason = "line_search_stall"
            break
        beta = beta + alpha * d
        gn = float(np.linalg.norm(g))
        trace.record(f, gn, alpha, True, time.perf_counter() - t0)
    else:
        if gn <= tol:
            trace.stop_reason = "gradient_tolerance"
    return beta, trace


def nonlinear_cg(objective, beta0, config: SolverConfig = SolverConfig("cg")):
    """Polak-Ribiere+ conjugate gradient with periodic steepest-descent restarts."""
    beta, f, g, gn, tol, trace, t0 = _start(objective, beta0, config)
    trace.stop_reason = "max_iterations"
    d = -g
    since_restart = 0
    for _ in range(config.max_iter):
        if gn <= tol:
            trace.stop_reason = "gradient_tolerance"
            break
        if float(d @ g) >= 0.0:
            d = -g
            since_restart = 0
        try:
            alpha, f, g_new = line_search(objective, beta, d, f0=f, g0=g,
                                          c1=config.c1, c2=config.c2)
        except LineSearchError:
            trace.stop_reason = "line_search_stall"
            break
        beta = beta + alpha * d
        coef = max(0.0, float(g_new @ (g_new - g)) / float(g @ g))
        since_restart += 1
        if since_restart >= beta.size:
            coef = 0.0
            since_restart = 0
        d = -g_new + coef * d
        g = g_new
        gn = float(np.linalg.norm(g))
        trace.record(f, gn, alpha, True, time.perf_counter() - t0)
    else:
        if gn <= tol:
            trace.stop_reason = "gradient_tolerance"
    return beta, trace


def lbfgs(objective, beta0, config: SolverConfig = SolverConfig("qn")):
    """Limited-memory BFGS (two-loop recursion) with Wolfe line search.

    Curvature pairs with s.y <= 1e-10 are skipped so flat or non-convex
    segments cannot corrupt the inverse-Hessian estimate.
    """
    beta, f, g, gn, tol, trace, t0 = _start(objective, beta0, config)
    trace.stop_reason = "max_iterations"
    memory: list[tuple[np.ndarray, np.ndarray, float]] = []
    for _ in range(config.max_iter):
        if gn <= tol:
            trace.stop_reason = "gradient_tolerance"
            break
        q = g.copy()
        alphas = []
        for s, yv, rho in reversed(memory):
            a = rho * float(s @ q)
            alphas.append(a)
            q -= a * yv
        if memory:
            s, yv, _ = memory[-1]
            q *= float(s @ yv) / float(yv @ yv)
        r = q
        for (s, yv, rho), a in zip(memory, reversed(alphas)):
            b = rho * float(yv @ r)
            r += (a - b) * s
        d = -r
        if float(d @ g) >= 0.0:
            d = -g
            memory.clear()
        try:
            alpha, f, g_new = line_search(objective, beta, d, f0=f, g0=g,
                                          c1=config.c1, c2=config.c2)
        except LineSearchError:
            trace.stop_reason = "line_search_stall"
            break
        step = alpha * d
        beta = beta + step
        yv = g_new - g
        sy = float(step @ yv)
        if sy > 1e-10:
            memory.append((step, yv, 1.0 / sy))
            if len(memory) > config.memory:
                memory.pop(0)
        g = g_new
        gn = float(np.linalg.norm(g))
        trace.record(f, gn, alpha, True, time.perf_counter() - t0)
    else:
        if gn <= tol:
            trace.stop_reason = "gradient_tolerance"
    return beta, trace


# ---------------------------------------------------------------------------
# Trust-region Newton
# ---------------------------------------------------------------------------

def _to_boundary(z, d, delta):
    """Positive tau with ||z + tau*d|| = delta."""
    dd = float(d @ d)
    zd = float(z @ d)
    zz = float(z @ z)
    disc = zd * zd + dd * (delta * delta - zz)
    return (-zd + math.sqrt(max(disc, 0.0))) / dd


def cg_steihaug(hv, g, delta):
    """Approximately solve H s = -g inside ||s|| <= delta.

    Stops when the residual falls below ``0.1 * min(1, ||g||^0.5) * ||g||``,
    when the iterate hits the boundary, or when a direction of non-positive
    curvature appears (followed to the boundary).  Returns ``(s,
    hit_boundary)``.
    """
    g = np.asarray(g, dtype=np.float64)
    s = np.zeros_like(g)
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0.0 or delta <= 0.0:
        return s, False
    eps = 0.1 * min(1.0, math.sqrt(gnorm)) * gnorm
    r = -g
    d = r.copy()
    rr = float(r @ r)
    if math.sqrt(rr) <= eps:
        return s, False
    for _ in range(2 * g.size + 10):
        hd = hv(d)
        dhd = float(d @ hd)
        if dhd <= 0.0:
            return s + _to_boundary(s, d, delta) * d, True
        alpha = rr / dhd
        s_next = s + alpha * d
        if float(np.linalg.norm(s_next)) >= delta:
            return s + _to_boundary(s, d, delta) * d, True
        s = s_next
        r = r - alpha * hd
        rr_new = float(r @ r)
        if math.sqrt(rr_new) <= eps:
            return s, False
        d = r + (rr_new / rr) * d
        rr = rr_new
    return s, False


def tron(objective, beta0, config: SolverConfig = SolverConfig("tron")):
    """Trust-region Newton: truncated-CG steps inside a spherical radius.

    The radius starts at ||grad0||, shrinks to sigma1*||s|| when the actual
    reduction falls short of a quarter of the model's prediction, and grows by
    sigma3 after a very successful boundary step.
    """
    beta, f, g, gn, tol, trace, t0 = _start(objective, beta0, config)
    trace.stop_reason = "max_iterations"
    delta = gn
    for _ in range(config.max_iter):
        if gn <= tol:
            trace.stop_reason = "gradient_tolerance"
            break
        if delta <= 1e-300:
            trace.stop_reason = "trust_region_collapse"
            break
        s, boundary = cg_steihaug(lambda v: objective.hessian_vec(beta, v),
                                  g, delta)
        snorm = float(np.linalg.norm(s))
        if snorm == 0.0:
            trace.stop_reason = "zero_step"
            break
        predicted = -(float(g @ s)
                      + 0.5 * float(s @ objective.hessian_vec(beta, s)))
        f_new, g_new = objective.value_grad(beta + s)
        if not np.isfinite(f_new):
            trace.stop_reason = "non_finite_objective"
            raise NumericError("objective became non-finite during trust-"
                               "region step", trace=trace, beta=beta)
        rho = (f - f_new) / predicted if predicted > 0.0 else -math.inf
        accepted = rho > config.tron_eta0
        if accepted:
            beta = beta + s
            f, g = f_new, g_new
            gn = float(np.linalg.norm(g))
        if rho < 0.25:
            delta = config.tron_sigma1 * snorm
        elif rho > 0.75 and boundary:
            delta = config.tron_sigma3 * delta
        trace.record(f, gn, delta, accepted, time.perf_counter() - t0)
    else:
        if gn <= tol:
            trace.stop_reason = "gradient_tolerance"
    return beta, trace


# ---------------------------------------------------------------------------
# Stochastic gradient descent
# ---------------------------------------------------------------------------

def sgd(objective, beta0, config: SolverConfig = SolverConfig("sgd")):
    """Mini-batch SGD with step eta0 / (1 + t * decay), t counting batches.

    Instances are reshuffled each epoch from the configured seed, so runs are
    reproducible bit for bit.  The trace records the full objective once per
    epoch.
    """
    rng = np.random.default_rng(config.seed)
    beta, f, g, gn, tol, trace, t0 = _start(objective, beta0, config)
    trace.stop_reason = "max_epochs"
    n = objective.n_instances
    batch = min(config.batch_size, n)
    t = 0
    eta = config.sgd_eta0
    for _ in range(config.max_epochs):
        if gn <= tol:
            trace.stop_reason = "gradient_tolerance"
            break
        perm = rng.permutation(n)
        for lo in range(0, n, batch):
            eta = config.sgd_eta0 / (1.0 + t * config.sgd_decay)
            beta -= eta * objective.grad_batch(beta, perm[lo:lo + batch])
            t += 1
        f, g = objective.value_grad(beta)
        if not np.isfinite(f):
            trace.stop_reason = "non_finite_objective"
            raise NumericError("objective became non-finite during SGD",
                               trace=trace, beta=beta)
        gn = float(np.linalg.norm(g))
        trace.record(f, gn, eta, True, time.perf_counter() - t0)
    else:
        if gn <= tol:
            trace.stop_reason = "gradient_tolerance"
    return beta, trace


_SOLVERS = {
    "gd": gradient_descent,
    "cg": nonlinear_cg,
    "qn": lbfgs,
    "tron": tron,
    "sgd": sgd,
}


def solve(objective, beta0, config: SolverConfig):
    """Run the solver named by ``config.solver``."""
    return _SOLVERS[config.solver](objective, beta0, config)
