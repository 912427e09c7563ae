"""Problem assembly: Dual-ROF / Dual-Huber-ROF denoising and TV reconstruction.

TV reconstruction (deblurring, tomography) comes in two splittings: implicit,
where TV enters through an inexact warm-started prox, and explicit, where the
stacked operator K = [A; D] turns every prox into a closed form.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .operators import LinearMap, block_stack, divergence, grad_forward, grad_map
from .proximal import project_ball, project_nonneg, prox_l2_fidelity, prox_zero
from .solvers import ProxProblem, SaddleProblem, SmoothProblem
from .tensor import norm2
from .tv import TvProxState, tv_prox, tv_value

GRAD_NORM_SQ = 8.0  # analytic bound on ||D||^2, the paper's L for the dual


@dataclass
class DualRofProblem:
    """Dual TV denoising, optionally with the Huber quadratic term.

    The iterate is a (2, H, W) dual field; huber_eps = 0 gives the plain
    (non strongly convex) ROF dual.
    """

    b: np.ndarray
    alpha: float
    huber_eps: float = 0.0
    smooth: SmoothProblem = field(init=False)

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("DualRofProblem: alpha must be positive")
        if self.huber_eps < 0:
            raise ValueError("DualRofProblem: huber_eps must be nonnegative")
        self.b = np.asarray(self.b, dtype=np.float64)
        mu = self.huber_eps / self.alpha
        b = self.b

        def grad(q):
            g = -grad_forward(divergence(q) + b)
            if mu != 0.0:
                g = g + mu * q
            return g

        def objective(q):
            val = 0.5 * norm2(divergence(q) + b) ** 2 + 0.5 * norm2(b) ** 2
            if mu != 0.0:
                val += 0.5 * mu * norm2(q) ** 2
            return val

        self.smooth = SmoothProblem(
            grad=grad,
            lipschitz=GRAD_NORM_SQ + mu,
            strong_convexity=mu,
            objective=objective,
        )

    def projector(self, q):
        return project_ball(q, self.alpha)

    def prox_problem(self):
        """The dual problem as a ProxProblem whose prox is the ball projection."""
        return ProxProblem(smooth=self.smooth, prox_g=lambda q, s: self.projector(q))

    def zero_dual(self):
        return np.zeros((2,) + self.b.shape)


def build_dual_rof(b, alpha, huber_eps=0.0):
    return DualRofProblem(b=b, alpha=alpha, huber_eps=huber_eps)


def primal_from_dual(q, b):
    """Recover the primal denoised image: u = b + div q."""
    q = np.asarray(q, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if q.shape[1:] != b.shape:
        raise ValueError(f"primal_from_dual: shape mismatch {q.shape} vs {b.shape}")
    return b + divergence(q)


@dataclass
class TvReconstructionProblem:
    """1/2 ||Au - b||^2 + alpha TV(u), optionally with u >= 0."""

    A: LinearMap
    b: np.ndarray
    alpha: float
    nonneg: bool
    splitting: str
    prox_problem: Optional[ProxProblem] = None
    saddle_problem: Optional[SaddleProblem] = None
    tv_state: Optional[TvProxState] = None


def build_tv_recon(A, b, alpha, nonneg=False, splitting="implicit", inner_budget=100,
                   accelerated_inner=True):
    """Assemble a TV reconstruction problem in the requested splitting.

    Implicit: ProxProblem with the quadratic fidelity as the smooth part and
    a warm-started inexact TV prox (weight = step * alpha). Explicit:
    SaddleProblem on K = [A; D] with blockwise conjugate proxes and a zero or
    nonnegativity prox for g.
    """
    if alpha <= 0:
        raise ValueError("build_tv_recon: alpha must be positive")
    if splitting not in ("implicit", "explicit"):
        raise ValueError(f"build_tv_recon: unknown splitting {splitting!r}")
    b = np.asarray(b, dtype=np.float64)
    prob = TvReconstructionProblem(A=A, b=b, alpha=alpha, nonneg=nonneg, splitting=splitting)

    if splitting == "implicit":
        if inner_budget < 1:
            raise ValueError("build_tv_recon: inner_budget must be >= 1 when implicit")
        smooth = SmoothProblem(
            grad=lambda u: A.adjoint(A.forward(u) - b),
            lipschitz=A.norm_sq(),
            objective=lambda u: 0.5 * norm2(A.forward(u) - b) ** 2,
        )
        state = TvProxState.cold(A.domain_shape, inner_budget,
                                 accelerated=accelerated_inner, nonneg=nonneg)
        prob.tv_state = state
        prob.prox_problem = ProxProblem(
            smooth=smooth,
            prox_g=lambda u, step: tv_prox(u, step * alpha, state),
            g_value=lambda u: alpha * tv_value(u),
        )
    else:
        D = grad_map(A.domain_shape, norm_sq_estimate=GRAD_NORM_SQ)
        K = block_stack(A, D)
        n_fid = int(np.prod(A.range_shape))
        dual_shape = D.range_shape

        def prox_fstar(y, step):
            # Fidelity block: conjugate prox of 1/2||.-b||^2; TV block:
            # projection onto the alpha-ball (step independent).
            y_fid = y[:n_fid].reshape(A.range_shape)
            step_fid = step[:n_fid].reshape(A.range_shape) if isinstance(step, np.ndarray) else step
            fid = (y_fid - step_fid * b) / (1.0 + step_fid)
            tvb = project_ball(y[n_fid:].reshape(dual_shape), alpha)
            return np.concatenate([fid.ravel(), tvb.ravel()])

        if nonneg:
            prox_g = lambda u, step: project_nonneg(u)
        else:
            prox_g = lambda u, step: prox_zero(u)

        prob.saddle_problem = SaddleProblem(
            K=K,
            prox_fstar=prox_fstar,
            prox_g=prox_g,
            norm_K_sq=K.norm_sq(),
        )
    return prob


def build_tv_saddle_implicit(A, b, alpha, nonneg=False, inner_budget=100,
                             accelerated_inner=True):
    """Saddle form with K = A and the TV term kept in an inexact prox of g.

    The conjugate prox on the measurement side is closed form; the primal
    prox is the warm-started inner TV solver (nonnegativity included).
    """
    if alpha <= 0:
        raise ValueError("build_tv_saddle_implicit: alpha must be positive")
    if inner_budget < 1:
        raise ValueError("build_tv_saddle_implicit: inner_budget must be >= 1")
    b = np.asarray(b, dtype=np.float64)
    state = TvProxState.cold(A.domain_shape, inner_budget,
                             accelerated=accelerated_inner, nonneg=nonneg)
    prob = TvReconstructionProblem(A=A, b=b, alpha=alpha, nonneg=nonneg,
                                   splitting="implicit", tv_state=state)
    prob.saddle_problem = SaddleProblem(
        K=A,
        prox_fstar=lambda y, step: (y - step * b) / (1.0 + step),
        prox_g=lambda u, step: tv_prox(u, step * alpha, state),
        norm_K_sq=A.norm_sq(),
    )
    return prob


def objective_tv(u, prob):
    """Fidelity plus alpha * TV; +inf when a nonnegativity constraint is violated."""
    u = np.asarray(u, dtype=np.float64)
    if prob.nonneg and float(u.min()) < -1e-12:
        return np.inf
    return 0.5 * norm2(prob.A.forward(u) - prob.b) ** 2 + prob.alpha * tv_value(u)
