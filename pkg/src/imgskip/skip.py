"""Randomized prox-skipping solvers: ProxSkip and the two PDHGSkip variants.

Each run owns one counter-based pseudorandom stream and consumes exactly one
draw per iteration regardless of the outcome, so trajectories with different
skip probabilities but equal seeds stay draw-aligned.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError
from .solvers import IterationLog, _check_finite, _check_step_rule, _ensure_log


@dataclass
class SkipConfig:
    """Skip probability and the seed of the per-run Bernoulli stream."""

    p: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"SkipConfig: p must be in (0, 1], got {self.p}")

    def stream(self):
        return np.random.Generator(np.random.Philox(self.seed))


def optimal_probability(mu, L):
    """The smallest probability that preserves the linear rate: sqrt(mu/L)."""
    if mu <= 0 or L <= 0 or mu > L:
        raise ValueError(f"optimal_probability: need 0 < mu <= L, got mu={mu}, L={L}")
    return float(np.sqrt(mu / L))


def bernoulli_op(x, p, draw):
    """Unbiased gate: x/p on a success draw, the zero element otherwise."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"bernoulli_op: p must be in (0, 1], got {p}")
    x = np.asarray(x, dtype=np.float64)
    return x / p if draw else np.zeros_like(x)


def run_proxskip(problem, x0, h0, gamma, skip, iters, log=None):
    """ProxSkip: prox applied with probability p, corrected by a control variate.

    Per iteration: xhat = x - gamma*(grad f(x) - h); with probability p,
    x <- prox_{(gamma/p) g}(xhat - (gamma/p) h), otherwise x <- xhat; then
    h <- h + (p/gamma)*(x - xhat). h stays constant on skipped iterations.
    """
    if gamma <= 0:
        raise ValueError("run_proxskip: gamma must be positive")
    log = _ensure_log(log)
    log.start()
    rng = skip.stream()
    p = skip.p
    x = np.array(x0, dtype=np.float64)
    h = np.array(h0, dtype=np.float64) if h0 is not None else np.zeros_like(x)
    prox_count = 0
    # The prox argument is grouped as (x - gamma*g) + (gamma - gamma/p)*h so
    # the h terms cancel exactly at p == 1 and the trajectory is bitwise PGD.
    h_coeff = gamma - gamma / p
    for k in range(iters):
        g = problem.smooth.grad(x)
        theta = rng.random() < p
        xhat = x - gamma * g + gamma * h
        if theta:
            x_new = problem.prox_g((x - gamma * g) + h_coeff * h, gamma / p)
            prox_count += 1
        else:
            x_new = xhat
        h = h + (p / gamma) * (x_new - xhat)
        x = x_new
        _check_finite(x, k, "proxskip")
        if log.observe(k + 1, x, prox_count, theta):
            break
    return x, log


def run_pdhgskip1(problem, x0, y0, sigma, tau, omega, skip, iters, log=None):
    """PDHGSkip-1: the primal prox and adjoint are gated by a Bernoulli operator.

    On a success draw, xhat = (prox_{sigma g}(x - sigma K^T y) - x)/p;
    otherwise xhat = 0 and both the prox and K^T are skipped. Then
    x <- x + xhat/(1 + omega) and y <- prox_{tau f*}(y + tau K(x + xhat)).
    """
    if sigma <= 0 or tau <= 0:
        raise ValueError("run_pdhgskip1: steps must be positive")
    if omega < 0:
        raise ValueError("run_pdhgskip1: omega must be nonnegative")
    log = _ensure_log(log)
    log.start()
    rng = skip.stream()
    p = skip.p
    K = problem.K
    x = np.array(x0, dtype=np.float64)
    y = np.array(y0, dtype=np.float64)
    prox_count = 0
    for k in range(iters):
        theta = rng.random() < p
        if theta:
            xhat = (problem.prox_g(x - sigma * K.adjoint(y), sigma) - x) / p
            prox_count += 1
        else:
            xhat = np.zeros_like(x)
        x_new = x + xhat / (1.0 + omega)
        y = problem.prox_fstar(y + tau * K.forward(x_new + xhat), tau)
        x = x_new
        _check_finite(x, k, "pdhgskip1")
        if log.observe(k + 1, x, prox_count, theta):
            break
    return x, log


def run_pdhgskip2(problem, x0, y0, h0, sigma, tau, skip, iters, log=None):
    """PDHGSkip-2: PDHG with a ProxSkip-style control variate on the primal prox.

    Recovers PDHG bitwise at p = 1 with h0 = 0; the control variate stays
    constant on skipped iterations.
    """
    _check_step_rule(sigma, tau, problem.norm_K_sq)
    log = _ensure_log(log)
    log.start()
    rng = skip.stream()
    p = skip.p
    K = problem.K
    x = np.array(x0, dtype=np.float64)
    y = np.array(y0, dtype=np.float64)
    h = np.array(h0, dtype=np.float64) if h0 is not None else np.zeros_like(x)
    prox_count = 0
    h_coeff = sigma - sigma / p  # exact 0 at p == 1, see run_proxskip
    for k in range(iters):
        kty = K.adjoint(y)
        theta = rng.random() < p
        xhat = x - sigma * kty + sigma * h
        if theta:
            x_new = problem.prox_g((x - sigma * kty) + h_coeff * h, sigma / p)
            prox_count += 1
        else:
            x_new = xhat
        xbar = 2.0 * x_new - x
        y = problem.prox_fstar(y + tau * K.forward(xbar), tau)
        h = h + (p / sigma) * (x_new - xhat)
        x = x_new
        _check_finite(x, k, "pdhgskip2")
        if log.observe(k + 1, x, prox_count, theta):
            break
    return x, log
