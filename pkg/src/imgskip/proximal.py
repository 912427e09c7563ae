"""Closed-form proximal operators and projections.

All functions are pure. A zero prox step returns the input unchanged, which
keeps skip-algorithm edge cases trivial.
"""

import numpy as np


def project_ball(q, alpha):
    """Project a (2, H, W) field onto pointwise Euclidean balls of radius alpha.

    output(i,j) = alpha * q(i,j) / max(alpha, |q(i,j)|_2); points already
    inside the ball are unchanged.
    """
    if alpha <= 0:
        raise ValueError(f"project_ball: alpha must be positive, got {alpha}")
    q = np.asarray(q, dtype=np.float64)
    mag = np.sqrt(q[0] ** 2 + q[1] ** 2)
    scale = alpha / np.maximum(alpha, mag)
    return q * scale


def shrink_l21(q, thresh):
    """Pointwise group soft-thresholding, the prox of thresh * ||.||_{2,1}.

    Each pixel pair is scaled by max(0, 1 - thresh/|q(i,j)|_2) and zeroed
    where its magnitude does not exceed the threshold.
    """
    if thresh < 0:
        raise ValueError(f"shrink_l21: thresh must be nonnegative, got {thresh}")
    q = np.asarray(q, dtype=np.float64)
    mag = np.sqrt(q[0] ** 2 + q[1] ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > thresh, 1.0 - thresh / mag, 0.0)
    return q * scale


def project_nonneg(u):
    """Elementwise max(u, 0)."""
    return np.maximum(np.asarray(u, dtype=np.float64), 0.0)


def prox_l2_fidelity(x, b, tau):
    """Prox of z -> 0.5*||z - b||^2 at x with step tau: (x + tau*b)/(1 + tau).

    tau may be a scalar or an array of matching shape (diagonal steps).
    """
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if x.shape != b.shape:
        raise ValueError(f"prox_l2_fidelity: shape mismatch {x.shape} vs {b.shape}")
    if np.isscalar(tau) and tau == 0.0:
        return x.copy()
    return (x + tau * b) / (1.0 + tau)


def prox_conjugate(prox_f, x, tau):
    """Prox of the convex conjugate via the Moreau identity.

    prox_{tau f*}(x) = x - tau * prox_{f/tau}(x/tau), where ``prox_f(z, s)``
    evaluates prox_{s f}(z).
    """
    x = np.asarray(x, dtype=np.float64)
    return x - tau * prox_f(x / tau, 1.0 / tau)


def prox_zero(x):
    """Identity: the prox of the zero function."""
    return np.array(x, dtype=np.float64)
