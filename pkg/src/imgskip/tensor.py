"""Dense real array containers and the vector-space primitives used by every solver.

All storage is float64. Images are (height, width) arrays, dual/TV fields are
(2, height, width) arrays with the vertical-difference channel first, and
sinograms are (n_angles, n_bins) arrays.
"""

from dataclasses import dataclass, field

import numpy as np


def _as_f64(a):
    return np.asarray(a, dtype=np.float64)


def dot(a, b):
    """Euclidean inner product of two equally sized arrays (any shape)."""
    a = _as_f64(a).ravel()
    b = _as_f64(b).ravel()
    if a.shape != b.shape:
        raise ValueError(f"dot: length mismatch {a.size} vs {b.size}")
    # np.dot delegates to BLAS, which accumulates blockwise/pairwise; good
    # enough headroom for runs with tens of thousands of iterations.
    return float(np.dot(a, b))


def norm2(a):
    """Euclidean norm, sqrt(dot(a, a))."""
    return float(np.linalg.norm(_as_f64(a).ravel()))


def axpby(alpha, x, beta, y):
    """Elementwise alpha*x + beta*y."""
    x = _as_f64(x)
    y = _as_f64(y)
    if x.shape != y.shape:
        raise ValueError(f"axpby: shape mismatch {x.shape} vs {y.shape}")
    return alpha * x + beta * y


def rel_error(x, ref):
    """norm2(x - ref) / norm2(ref). The reference must be nonzero."""
    x = _as_f64(x)
    ref = _as_f64(ref)
    if x.shape != ref.shape:
        raise ValueError(f"rel_error: shape mismatch {x.shape} vs {ref.shape}")
    denom = norm2(ref)
    if denom == 0.0:
        raise ZeroDivisionError("rel_error: zero reference")
    return norm2(x - ref) / denom


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what}: non-finite entries")


@dataclass
class Image:
    """A real-valued 2-D grid. ``data`` has shape (height, width)."""

    data: np.ndarray

    def __post_init__(self):
        self.data = _as_f64(self.data)
        if self.data.ndim != 2 or min(self.data.shape) < 1:
            raise ValueError(f"Image: expected 2-D grid, got shape {self.data.shape}")
        _check_finite(self.data, "Image")

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]


@dataclass
class DualField:
    """Two-channel field on an image grid, shape (2, height, width).

    Channel 0 holds the vertical difference component, channel 1 the
    horizontal one.
    """

    data: np.ndarray

    def __post_init__(self):
        self.data = _as_f64(self.data)
        if self.data.ndim != 3 or self.data.shape[0] != 2:
            raise ValueError(f"DualField: expected (2, H, W), got shape {self.data.shape}")
        _check_finite(self.data, "DualField")

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]

    def magnitude(self):
        """Pointwise Euclidean magnitude, shape (height, width)."""
        return np.sqrt(self.data[0] ** 2 + self.data[1] ** 2)


@dataclass
class Sinogram:
    """Tomography measurement grid, shape (n_angles, n_bins)."""

    data: np.ndarray

    def __post_init__(self):
        self.data = _as_f64(self.data)
        if self.data.ndim != 2 or min(self.data.shape) < 1:
            raise ValueError(f"Sinogram: expected 2-D grid, got shape {self.data.shape}")
        _check_finite(self.data, "Sinogram")

    @property
    def n_angles(self):
        return self.data.shape[0]

    @property
    def n_bins(self):
        return self.data.shape[1]
