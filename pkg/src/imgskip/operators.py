"""Linear forward operators with exact matched adjoints.

Provides finite differences and their negative transpose (divergence),
periodic convolutional blur, a parallel-beam Radon transform assembled as a
sparse matrix so forward and adjoint are transposes by construction, block
stacking, and power-method operator-norm estimation.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .tensor import dot, norm2


@dataclass
class LinearMap:
    """A forward/adjoint pair with shape metadata and a cached norm estimate.

    ``abs_forward``/``abs_adjoint`` apply the entrywise absolute value of the
    operator matrix; they back diagonal preconditioning and are exact for the
    shipped operators (all their stencil weights have known signs).
    """

    domain_shape: tuple
    range_shape: tuple
    forward: Callable[[np.ndarray], np.ndarray]
    adjoint: Callable[[np.ndarray], np.ndarray]
    norm_sq_estimate: Optional[float] = None
    abs_forward: Optional[Callable[[np.ndarray], np.ndarray]] = None
    abs_adjoint: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def norm_sq(self, iters=100, seed=0):
        """Cached ||op||^2 estimate; computed by the power method on demand."""
        if self.norm_sq_estimate is None:
            self.norm_sq_estimate = power_method(self, iters=iters, seed=seed)
        return self.norm_sq_estimate


# -- finite differences ------------------------------------------------------

def grad_forward(u):
    """Forward differences with Neumann boundaries.

    Returns a (2, H, W) field: channel 0 is the vertical difference
    u(i+1,j) - u(i,j) (zero on the last row), channel 1 the horizontal one
    (zero on the last column).
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2 or min(u.shape) < 2:
        raise ValueError(f"grad_forward: need a 2-D grid with both sides >= 2, got {u.shape}")
    g = np.zeros((2,) + u.shape)
    g[0, :-1, :] = u[1:, :] - u[:-1, :]
    g[1, :, :-1] = u[:, 1:] - u[:, :-1]
    return g


def divergence(q):
    """Discrete divergence, the negative transpose of grad_forward."""
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 3 or q.shape[0] != 2 or min(q.shape[1:]) < 2:
        raise ValueError(f"divergence: expected (2, H, W) with H, W >= 2, got {q.shape}")
    qy, qx = q[0], q[1]
    out = np.zeros(qy.shape)
    out[:-1, :] += qy[:-1, :]
    out[1:, :] -= qy[:-1, :]
    out[:, :-1] += qx[:, :-1]
    out[:, 1:] -= qx[:, :-1]
    return out


def grad_map(shape, norm_sq_estimate=None):
    """LinearMap wrapper for grad_forward on a fixed grid shape.

    The analytic bound ||D||^2 <= 8 can be supplied via norm_sq_estimate.
    """
    h, w = shape

    def absgrad(u):
        g = np.zeros((2, h, w))
        g[0, :-1, :] = u[1:, :] + u[:-1, :]
        g[1, :, :-1] = u[:, 1:] + u[:, :-1]
        return g

    def absdiv(q):
        qy, qx = q[0], q[1]
        out = np.zeros((h, w))
        out[:-1, :] += qy[:-1, :]
        out[1:, :] += qy[:-1, :]
        out[:, :-1] += qx[:, :-1]
        out[:, 1:] += qx[:, :-1]
        return out

    return LinearMap(
        domain_shape=(h, w),
        range_shape=(2, h, w),
        forward=grad_forward,
        adjoint=lambda q: -divergence(q),
        norm_sq_estimate=norm_sq_estimate,
        abs_forward=absgrad,
        abs_adjoint=absdiv,
    )


# -- convolutional blur ------------------------------------------------------

@dataclass
class BlurKernel:
    """Odd square convolution kernel with nonnegative weights summing to 1."""

    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        s = self.weights.shape
        if len(s) != 2 or s[0] != s[1] or s[0] % 2 == 0:
            raise ValueError(f"BlurKernel: weights must be odd and square, got {s}")
        if np.any(self.weights < 0):
            raise ValueError("BlurKernel: negative weights")
        total = float(self.weights.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"BlurKernel: weights sum to {total}, expected 1")

    @property
    def size(self):
        return self.weights.shape[0]


def gaussian_kernel(size, sigma):
    """Normalized truncated Gaussian blur kernel."""
    if size % 2 == 0 or size < 1:
        raise ValueError(f"gaussian_kernel: size must be odd, got {size}")
    ax = np.arange(size) - size // 2
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma**2))
    return BlurKernel(g / g.sum())


def _check_blur_shapes(u, kernel):
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2:
        raise ValueError(f"blur: expected 2-D image, got shape {u.shape}")
    if kernel.size > min(u.shape):
        raise ValueError(f"blur: kernel size {kernel.size} exceeds image {u.shape}")
    return u


def blur_forward(u, kernel):
    """Circular (periodic) 2-D convolution with the kernel."""
    u = _check_blur_shapes(u, kernel)
    c = kernel.size // 2
    out = np.zeros_like(u)
    for a in range(kernel.size):
        for b in range(kernel.size):
            w = kernel.weights[a, b]
            if w != 0.0:
                out += w * np.roll(u, (a - c, b - c), axis=(0, 1))
    return out


def blur_adjoint(r, kernel):
    """Circular correlation: convolution with the 180-degree rotated kernel."""
    r = _check_blur_shapes(r, kernel)
    c = kernel.size // 2
    out = np.zeros_like(r)
    for a in range(kernel.size):
        for b in range(kernel.size):
            w = kernel.weights[a, b]
            if w != 0.0:
                out += w * np.roll(r, (c - a, c - b), axis=(0, 1))
    return out


def blur_map(kernel, shape):
    # Kernel weights are nonnegative, so |A| is A itself.
    return LinearMap(
        domain_shape=tuple(shape),
        range_shape=tuple(shape),
        forward=lambda u: blur_forward(u, kernel),
        adjoint=lambda r: blur_adjoint(r, kernel),
        abs_forward=lambda u: blur_forward(u, kernel),
        abs_adjoint=lambda r: blur_adjoint(r, kernel),
    )


# -- parallel-beam Radon transform -------------------------------------------

@dataclass
class RadonGeometry:
    """Parallel-beam acquisition geometry on a square image.

    Angles are uniform over [0, pi); detector bins are spaced by
    ``bin_spacing`` in pixel units and centered on the image center.
    """

    image_side: int
    n_angles: int
    n_bins: int
    bin_spacing: float = 1.0
    angles: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.image_side < 2 or self.n_angles < 1:
            raise ValueError("RadonGeometry: need image_side >= 2 and n_angles >= 1")
        if self.n_bins < self.image_side:
            raise ValueError(
                f"RadonGeometry: n_bins {self.n_bins} < image_side {self.image_side}"
            )
        if self.angles is None:
            self.angles = np.arange(self.n_angles) * (np.pi / self.n_angles)
        else:
            self.angles = np.asarray(self.angles, dtype=np.float64)
            if np.any(np.diff(self.angles) <= 0):
                raise ValueError("RadonGeometry: angles must be strictly increasing")


def radon_system_matrix(geom):
    """Assemble the ray-driven system matrix with bilinear interpolation.

    Rays march in unit-length steps; each sample deposits its four bilinear
    weights, making the transpose the exact matched adjoint.
    """
    n = geom.image_side
    center = (n - 1) / 2.0
    half_span = n / np.sqrt(2.0)
    n_steps = int(np.ceil(2.0 * half_span)) + 1
    steps = np.linspace(-half_span, half_span, n_steps)  # spacing ~1 pixel
    offsets = (np.arange(geom.n_bins) - (geom.n_bins - 1) / 2.0) * geom.bin_spacing

    rows, cols, vals = [], [], []
    for ia, theta in enumerate(geom.angles):
        # Detector axis n_hat, ray direction d_hat, in (x, y) = (col, row).
        nx, ny = np.cos(theta), np.sin(theta)
        dx, dy = -np.sin(theta), np.cos(theta)
        # Sample points for all (bin, step) pairs of this angle.
        px = offsets[:, None] * nx + steps[None, :] * dx + center
        py = offsets[:, None] * ny + steps[None, :] * dy + center
        x0 = np.floor(px).astype(np.int64)
        y0 = np.floor(py).astype(np.int64)
        fx = px - x0
        fy = py - y0
        ray_idx = ia * geom.n_bins + np.broadcast_to(
            np.arange(geom.n_bins)[:, None], px.shape
        )
        for ddy, ddx, w in (
            (0, 0, (1 - fy) * (1 - fx)),
            (0, 1, (1 - fy) * fx),
            (1, 0, fy * (1 - fx)),
            (1, 1, fy * fx),
        ):
            yy = y0 + ddy
            xx = x0 + ddx
            ok = (yy >= 0) & (yy < n) & (xx >= 0) & (xx < n) & (w > 0)
            rows.append(ray_idx[ok])
            cols.append((yy[ok] * n + xx[ok]))
            vals.append(w[ok])

    m = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(geom.n_angles * geom.n_bins, n * n),
    )
    return m.tocsr()


def radon_map(geom):
    matrix = radon_system_matrix(geom)
    matrix_t = matrix.T.tocsr()
    abs_matrix = matrix  # interpolation weights are nonnegative
    n = geom.image_side
    rshape = (geom.n_angles, geom.n_bins)

    def forward(u):
        u = np.asarray(u, dtype=np.float64)
        if u.shape != (n, n):
            raise ValueError(f"radon forward: expected {(n, n)}, got {u.shape}")
        return (matrix @ u.ravel()).reshape(rshape)

    def adjoint(s):
        s = np.asarray(s, dtype=np.float64)
        if s.shape != rshape:
            raise ValueError(f"radon adjoint: expected {rshape}, got {s.shape}")
        return (matrix_t @ s.ravel()).reshape(n, n)

    return LinearMap(
        domain_shape=(n, n),
        range_shape=rshape,
        forward=forward,
        adjoint=adjoint,
        abs_forward=lambda u: (abs_matrix @ np.asarray(u, float).ravel()).reshape(rshape),
        abs_adjoint=lambda s: (matrix_t @ np.asarray(s, float).ravel()).reshape(n, n),
    )


# -- composition helpers -----------------------------------------------------

def identity_map(shape):
    shape = tuple(shape)
    return LinearMap(
        domain_shape=shape,
        range_shape=shape,
        forward=lambda x: np.array(x, dtype=np.float64),
        adjoint=lambda x: np.array(x, dtype=np.float64),
        norm_sq_estimate=1.0,
        abs_forward=lambda x: np.array(x, dtype=np.float64),
        abs_adjoint=lambda x: np.array(x, dtype=np.float64),
    )


def diagonal_map(diag):
    diag = np.asarray(diag, dtype=np.float64)
    return LinearMap(
        domain_shape=diag.shape,
        range_shape=diag.shape,
        forward=lambda x: diag * x,
        adjoint=lambda x: diag * x,
        norm_sq_estimate=float(np.max(np.abs(diag)) ** 2),
        abs_forward=lambda x: np.abs(diag) * x,
        abs_adjoint=lambda x: np.abs(diag) * x,
    )


def block_stack(a, d):
    """Stack two maps with a common domain into K x = (a x, d x).

    The range is the flat concatenation of both blocks; the adjoint sums the
    per-block adjoints.
    """
    if tuple(a.domain_shape) != tuple(d.domain_shape):
        raise ValueError(
            f"block_stack: domain mismatch {a.domain_shape} vs {d.domain_shape}"
        )
    na = int(np.prod(a.range_shape))
    nd = int(np.prod(d.range_shape))

    def forward(x):
        return np.concatenate([a.forward(x).ravel(), d.forward(x).ravel()])

    def adjoint(y):
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (na + nd,):
            raise ValueError(f"block_stack adjoint: expected ({na + nd},), got {y.shape}")
        ya = y[:na].reshape(a.range_shape)
        yd = y[na:].reshape(d.range_shape)
        return a.adjoint(ya) + d.adjoint(yd)

    abs_forward = None
    abs_adjoint = None
    if a.abs_forward is not None and d.abs_forward is not None:
        def abs_forward(x):
            return np.concatenate([a.abs_forward(x).ravel(), d.abs_forward(x).ravel()])

        def abs_adjoint(y):
            ya = np.asarray(y, float)[:na].reshape(a.range_shape)
            yd = np.asarray(y, float)[na:].reshape(d.range_shape)
            return a.abs_adjoint(ya) + d.abs_adjoint(yd)

    return LinearMap(
        domain_shape=tuple(a.domain_shape),
        range_shape=(na + nd,),
        forward=forward,
        adjoint=adjoint,
        abs_forward=abs_forward,
        abs_adjoint=abs_adjoint,
    )


def power_method(op, iters=100, seed=0):
    """Estimate ||op||^2 by power iteration on the normal operator.

    Returns the Rayleigh quotient of adj(op) o op after ``iters`` iterations
    from a seeded random start; 0 for the zero operator.
    """
    if iters < 1:
        raise ValueError("power_method: iters must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.domain_shape)
    est = 0.0
    for _ in range(iters):
        y = op.forward(x)
        ny = norm2(y)
        if ny == 0.0:
            return 0.0
        z = op.adjoint(y)
        est = dot(x, z) / dot(x, x)
        nz = norm2(z)
        if nz == 0.0:
            return 0.0
        x = z / nz
    return float(est)
