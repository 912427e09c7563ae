"""Problem assembly: Dual-ROF, Huber variant, TV reconstruction splittings."""

import numpy as np
import pytest

from imgskip import (
    build_dual_rof,
    build_tv_recon,
    build_tv_saddle_implicit,
    divergence,
    gaussian_kernel,
    blur_map,
    grad_forward,
    identity_map,
    norm2,
    primal_from_dual,
    run_aprojgd,
    run_pgd,
)
from imgskip.problems import GRAD_NORM_SQ, objective_tv


def finite_difference_gradient(f, x, eps=1e-6):
    g = np.zeros_like(x)
    flat = g.ravel()
    xf = x.ravel()
    for i in range(x.size):
        old = xf[i]
        xf[i] = old + eps
        hi = f(x)
        xf[i] = old - eps
        lo = f(x)
        xf[i] = old
        flat[i] = (hi - lo) / (2 * eps)
    return g


def test_dual_rof_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    b = rng.standard_normal((4, 4))
    prob = build_dual_rof(b, 0.5)
    q = 0.3 * rng.standard_normal((2, 4, 4))
    fd = finite_difference_gradient(prob.smooth.objective, q.copy())
    np.testing.assert_allclose(prob.smooth.grad(q), fd, atol=1e-5)


def test_dual_huber_gradient_and_constants():
    rng = np.random.default_rng(1)
    b = rng.standard_normal((4, 4))
    alpha, eps = 0.55, 0.1
    prob = build_dual_rof(b, alpha, eps)
    mu = eps / alpha
    assert prob.smooth.strong_convexity == pytest.approx(mu)
    assert prob.smooth.lipschitz == pytest.approx(GRAD_NORM_SQ + mu)
    q = 0.2 * rng.standard_normal((2, 4, 4))
    fd = finite_difference_gradient(prob.smooth.objective, q.copy())
    np.testing.assert_allclose(prob.smooth.grad(q), fd, atol=1e-5)


def test_dual_rof_validation():
    b = np.zeros((4, 4))
    with pytest.raises(ValueError):
        build_dual_rof(b, 0.0)
    with pytest.raises(ValueError):
        build_dual_rof(b, 0.5, -0.1)


def test_dual_rof_projector_radius():
    prob = build_dual_rof(np.zeros((4, 4)), 0.3)
    q = np.full((2, 4, 4), 5.0)
    p = prob.projector(q)
    mag = np.sqrt(p[0] ** 2 + p[1] ** 2)
    np.testing.assert_allclose(mag, 0.3)


def test_primal_from_dual_identity():
    rng = np.random.default_rng(2)
    b = rng.standard_normal((5, 5))
    q = rng.standard_normal((2, 5, 5))
    np.testing.assert_allclose(primal_from_dual(q, b), b + divergence(q))
    with pytest.raises(ValueError):
        primal_from_dual(np.zeros((2, 4, 4)), np.zeros((5, 5)))


def test_dual_rof_solves_rof_denoising():
    # The recovered primal must minimize 0.5||u - b||^2 + alpha*TV(u):
    # compare objective against random feasible perturbations.
    from imgskip import tv_value
    rng = np.random.default_rng(3)
    b = rng.standard_normal((8, 8))
    alpha = 0.4
    prob = build_dual_rof(b, alpha)
    q, _ = run_aprojgd(prob.smooth, prob.projector, prob.zero_dual(),
                       1.0 / prob.smooth.lipschitz, 5000)
    u = primal_from_dual(q, b)
    rof = lambda v: 0.5 * norm2(v - b) ** 2 + alpha * tv_value(v)
    base = rof(u)
    for seed in range(8):
        d = np.random.default_rng(seed).standard_normal((8, 8))
        d /= np.linalg.norm(d)
        assert rof(u + 1e-3 * d) >= base - 1e-9


def test_tv_recon_implicit_structure():
    A = identity_map((6, 6))
    b = np.random.default_rng(4).standard_normal((6, 6))
    prob = build_tv_recon(A, b, 0.2, splitting="implicit", inner_budget=30)
    assert prob.prox_problem is not None and prob.saddle_problem is None
    assert prob.tv_state.inner_iters == 30
    # Gradient of the fidelity term.
    u = np.random.default_rng(5).standard_normal((6, 6))
    np.testing.assert_allclose(prob.prox_problem.smooth.grad(u), u - b, rtol=1e-12)


def test_tv_recon_explicit_structure():
    A = blur_map(gaussian_kernel(3, 1.0), (6, 6))
    b = np.zeros((6, 6))
    prob = build_tv_recon(A, b, 0.2, splitting="explicit")
    assert prob.saddle_problem is not None and prob.prox_problem is None
    K = prob.saddle_problem.K
    assert K.range_shape == (36 + 72,)
    # The conjugate-prox fidelity block and the TV projection block.
    y = np.concatenate([np.full(36, 2.0), np.full(72, 5.0)])
    out = prob.saddle_problem.prox_fstar(y, 1.0)
    np.testing.assert_allclose(out[:36], (2.0 - 0.0) / 2.0)
    mag = np.sqrt(out[36:36 + 36] ** 2 + out[72:] ** 2)
    np.testing.assert_allclose(mag, 0.2)


def test_tv_recon_validation():
    A = identity_map((6, 6))
    with pytest.raises(ValueError):
        build_tv_recon(A, np.zeros((6, 6)), -1.0)
    with pytest.raises(ValueError):
        build_tv_recon(A, np.zeros((6, 6)), 0.1, splitting="magic")
    with pytest.raises(ValueError):
        build_tv_recon(A, np.zeros((6, 6)), 0.1, splitting="implicit", inner_budget=0)


def test_tv_recon_nonneg_prox_g_explicit():
    A = identity_map((4, 4))
    prob = build_tv_recon(A, np.zeros((4, 4)), 0.1, nonneg=True, splitting="explicit")
    x = np.array([[-1.0, 2.0], [0.5, -0.2]]).repeat(2, axis=0).repeat(2, axis=1)
    out = prob.saddle_problem.prox_g(x, 1.0)
    assert out.min() >= 0.0


def test_tv_saddle_implicit_structure():
    A = blur_map(gaussian_kernel(3, 1.0), (6, 6))
    b = np.random.default_rng(6).standard_normal((6, 6))
    prob = build_tv_saddle_implicit(A, b, 0.2, inner_budget=40)
    sp = prob.saddle_problem
    assert sp.K is A
    y = np.full((6, 6), 3.0)
    np.testing.assert_allclose(sp.prox_fstar(y, 1.0), (3.0 - b) / 2.0)
    assert prob.tv_state.inner_iters == 40


def test_objective_tv_penalizes_negativity_only_when_constrained():
    A = identity_map((4, 4))
    b = np.ones((4, 4))
    u = -np.ones((4, 4))
    free = build_tv_recon(A, b, 0.1, nonneg=False, splitting="explicit")
    con = build_tv_recon(A, b, 0.1, nonneg=True, splitting="explicit")
    assert np.isfinite(objective_tv(u, free))
    assert objective_tv(u, con) == np.inf
    assert np.isfinite(objective_tv(np.abs(u), con))


def test_implicit_denoising_matches_dual_solution():
    # PGD with a generous inner TV prox and AProjGD on the dual must agree.
    rng = np.random.default_rng(7)
    b = rng.standard_normal((8, 8))
    alpha = 0.3
    dual = build_dual_rof(b, alpha)
    q, _ = run_aprojgd(dual.smooth, dual.projector, dual.zero_dual(),
                       1.0 / dual.smooth.lipschitz, 8000)
    u_dual = primal_from_dual(q, b)

    prob = build_tv_recon(identity_map((8, 8)), b, alpha,
                          splitting="implicit", inner_budget=400)
    u_pgd, _ = run_pgd(prob.prox_problem, np.zeros((8, 8)), 1.0, 60)
    assert np.linalg.norm(u_pgd - u_dual) / np.linalg.norm(u_dual) < 1e-5


def test_grad_forward_alias_reexported():
    # The TV field convention used across problems: channel 0 vertical.
    u = np.zeros((3, 3))
    u[2, :] = 1.0
    g = grad_forward(u)
    assert g[0, 1, 0] == 1.0 and g[1].max() == 0.0
