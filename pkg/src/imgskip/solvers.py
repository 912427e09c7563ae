"""Deterministic first-order solvers and the per-iteration logging machinery.

Solvers operate on plain float64 arrays of any shape; the problem objects
carry the oracles. Every solver returns (final iterate, IterationLog).
"""

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DivergenceError
from .tensor import rel_error


@dataclass
class SmoothProblem:
    """Gradient oracle with smoothness/strong-convexity constants."""

    grad: Callable
    lipschitz: float
    strong_convexity: float = 0.0
    objective: Optional[Callable] = None

    def __post_init__(self):
        if self.lipschitz < self.strong_convexity or self.strong_convexity < 0:
            raise ValueError("SmoothProblem: need lipschitz >= strong_convexity >= 0")


@dataclass
class ProxProblem:
    """Composite problem f + g with a prox oracle ``prox_g(x, step)``."""

    smooth: SmoothProblem
    prox_g: Callable
    g_value: Optional[Callable] = None


@dataclass
class SaddleProblem:
    """min_x f(Kx) + g(x) with prox oracles for g and the conjugate f*."""

    K: object
    prox_fstar: Callable
    prox_g: Callable
    norm_K_sq: float


@dataclass
class RunRecord:
    iteration: int
    elapsed_s: float
    prox_count: int
    inner_iter_count: int
    l2_rel_error: Optional[float]
    objective: Optional[float]
    prox_applied: bool


class IterationLog:
    """Collects one RunRecord per iteration and handles tolerance stopping.

    ``reference`` enables relative-error tracking, optionally after mapping
    the iterate through ``transform`` (e.g. dual -> primal). ``inner_counter``
    is polled each iteration for nested prox-solver cost accounting.
    """

    def __init__(self, reference=None, objective_fn=None, transform=None,
                 inner_counter=None, tol=None, callback=None):
        self.reference = reference
        self.objective_fn = objective_fn
        self.transform = transform
        self.inner_counter = inner_counter
        self.tol = tol
        self.callback = callback
        self.records = []
        self._t0 = None

    def start(self):
        self.records = []
        self._t0 = time.monotonic()

    def observe(self, iteration, x, prox_count, prox_applied):
        """Record one iteration; returns True when the tolerance is reached."""
        elapsed = time.monotonic() - self._t0
        err = None
        if self.reference is not None:
            z = self.transform(x) if self.transform is not None else x
            err = rel_error(z, self.reference)
        obj = self.objective_fn(x) if self.objective_fn is not None else None
        inner = self.inner_counter() if self.inner_counter is not None else 0
        record = RunRecord(iteration, elapsed, prox_count, inner, err, obj, prox_applied)
        self.records.append(record)
        if self.callback is not None:
            self.callback(record, x)
        return self.tol is not None and err is not None and err < self.tol

    @property
    def final_rel_error(self):
        for record in reversed(self.records):
            if record.l2_rel_error is not None:
                return record.l2_rel_error
        return None


def _ensure_log(log):
    return log if log is not None else IterationLog()


def _check_finite(x, k, algorithm):
    if not np.all(np.isfinite(x)):
        raise DivergenceError(k, algorithm)


def run_gd(problem, x0, gamma, iters, log=None):
    """Plain gradient descent with a fixed step."""
    if gamma <= 0:
        raise ValueError("run_gd: gamma must be positive")
    log = _ensure_log(log)
    log.start()
    x = np.array(x0, dtype=np.float64)
    for k in range(iters):
        x = x - gamma * problem.grad(x)
        _check_finite(x, k, "gd")
        if log.observe(k + 1, x, 0, False):
            break
    return x, log


def run_pgd(problem, x0, gamma, iters, log=None):
    """Proximal gradient descent (ISTA): x <- prox_{gamma g}(x - gamma grad f)."""
    if gamma <= 0:
        raise ValueError("run_pgd: gamma must be positive")
    log = _ensure_log(log)
    log.start()
    x = np.array(x0, dtype=np.float64)
    prox_count = 0
    for k in range(iters):
        x = problem.prox_g(x - gamma * problem.smooth.grad(x), gamma)
        prox_count += 1
        _check_finite(x, k, "pgd")
        if log.observe(k + 1, x, prox_count, True):
            break
    return x, log


def run_fista(problem, x0, gamma, iters, log=None):
    """FISTA with the Beck-Teboulle momentum recurrence, t0 = 1."""
    if gamma <= 0:
        raise ValueError("run_fista: gamma must be positive")
    log = _ensure_log(log)
    log.start()
    x = np.array(x0, dtype=np.float64)
    x_prev = x
    t = 1.0
    prox_count = 0
    for k in range(iters):
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        xbar = x + ((t - 1.0) / t_next) * (x - x_prev)
        x_prev = x
        x = problem.prox_g(xbar - gamma * problem.smooth.grad(xbar), gamma)
        prox_count += 1
        t = t_next
        _check_finite(x, k, "fista")
        if log.observe(k + 1, x, prox_count, True):
            break
    return x, log


def run_aprojgd(problem, projector, x0, gamma, iters, log=None):
    """Accelerated projected gradient: FISTA whose prox is a projection."""
    wrapped = ProxProblem(smooth=problem, prox_g=lambda z, s: projector(z))
    return run_fista(wrapped, x0, gamma, iters, log=log)


def _check_step_rule(sigma, tau, norm_K_sq):
    if np.isscalar(sigma) and np.isscalar(tau):
        if sigma <= 0 or tau <= 0:
            raise ValueError("pdhg: steps must be positive")
        if sigma * tau * norm_K_sq > 1.0 + 1e-10:
            raise ValueError(
                f"pdhg: step rule violated, sigma*tau*||K||^2 = {sigma * tau * norm_K_sq}"
            )


def run_pdhg(problem, x0, y0, sigma, tau, iters, log=None):
    """Primal-dual hybrid gradient with over-relaxation theta = 1.

    Primal step sigma, dual step tau; requires sigma*tau*||K||^2 <= 1.
    Scalar or diagonal (array) steps are accepted.
    """
    _check_step_rule(sigma, tau, problem.norm_K_sq)
    log = _ensure_log(log)
    log.start()
    K = problem.K
    x = np.array(x0, dtype=np.float64)
    y = np.array(y0, dtype=np.float64)
    prox_count = 0
    for k in range(iters):
        x_new = problem.prox_g(x - sigma * K.adjoint(y), sigma)
        prox_count += 1
        xbar = 2.0 * x_new - x
        y = problem.prox_fstar(y + tau * K.forward(xbar), tau)
        x = x_new
        _check_finite(x, k, "pdhg")
        if log.observe(k + 1, x, prox_count, True):
            break
    return x, log


def diagonal_steps(K, floor=1e-12):
    """Pock-Chambolle diagonal step sizes from absolute row/column sums.

    Returns (sigma, tau): the primal step 1/sum_i|K_ij| (domain-shaped) and
    the dual step 1/sum_j|K_ij| (range-shaped); sums are floored at ``floor``.
    """
    if K.abs_forward is None or K.abs_adjoint is None:
        raise ValueError("diagonal_steps: operator lacks absolute row/column sums")
    col_sums = K.abs_adjoint(np.ones(K.range_shape))
    row_sums = K.abs_forward(np.ones(K.domain_shape))
    sigma = 1.0 / np.maximum(col_sums, floor)
    tau = 1.0 / np.maximum(row_sums, floor)
    return sigma, tau


def run_pdhg_preconditioned(problem, iters, log=None, x0=None, y0=None):
    """PDHG with diagonal preconditioning; used to manufacture references."""
    sigma, tau = diagonal_steps(problem.K)
    if x0 is None:
        x0 = np.zeros(problem.K.domain_shape)
    if y0 is None:
        y0 = np.zeros(problem.K.range_shape)
    return run_pdhg(problem, x0, y0, sigma, tau, iters, log=log)
