"""Deterministic synthetic test images and the Gaussian noise model."""

import numpy as np


def gen_shapes_phantom(height, width):
    """Piecewise-constant phantom: shapes cut into a bright plate.

    A near-full-frame plate at intensity 1.0 carries two rectangles, a disc
    and a right triangle at moderate contrast. Values lie in [0, 1] and form
    a small discrete set; positions and intensities are fixed relative to
    the grid size.
    """
    if height < 16 or width < 16:
        raise ValueError(f"gen_shapes_phantom: need at least 16x16, got {height}x{width}")
    u = np.zeros((height, width))
    rows = np.arange(height)[:, None]
    cols = np.arange(width)[None, :]

    u[int(0.03 * height):int(0.97 * height), int(0.03 * width):int(0.97 * width)] = 1.0
    u[int(0.12 * height):int(0.40 * height), int(0.10 * width):int(0.46 * width)] = 0.8

    cy, cx = 0.30 * height, 0.70 * width
    r = 0.15 * min(height, width)
    u[(rows - cy) ** 2 + (cols - cx) ** 2 <= r**2] = 0.7

    # Right triangle anchored at its lower-left corner.
    r0, r1 = int(0.55 * height), int(0.92 * height)
    c0, c1 = int(0.15 * width), int(0.55 * width)
    in_box = (rows >= r0) & (rows < r1) & (cols >= c0) & (cols < c1)
    below_hypotenuse = (cols - c0) * (r1 - r0) <= (rows - r0) * (c1 - c0)
    u[in_box & below_hypotenuse] = 0.85

    u[int(0.62 * height):int(0.88 * height), int(0.66 * width):int(0.90 * width)] = 0.75
    return u


def gen_disc_phantom(n):
    """Discs and an annulus inside the inscribed circle; zero outside it."""
    if n < 16:
        raise ValueError(f"gen_disc_phantom: need at least 16, got {n}")
    u = np.zeros((n, n))
    c = (n - 1) / 2.0
    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    rr = np.sqrt((rows - c) ** 2 + (cols - c) ** 2)

    u[rr <= 0.44 * n] = 0.25
    u[(rr >= 0.28 * n) & (rr <= 0.36 * n)] = 0.7
    hot = (rows - (c - 0.14 * n)) ** 2 + (cols - (c + 0.10 * n)) ** 2 <= (0.08 * n) ** 2
    u[hot] = 1.0
    cold = (rows - (c + 0.12 * n)) ** 2 + (cols - (c - 0.08 * n)) ** 2 <= (0.06 * n) ** 2
    u[cold] = 0.1
    return u


def add_noise(u, sigma, seed):
    """Add i.i.d. zero-mean Gaussian noise with standard deviation sigma."""
    if sigma < 0:
        raise ValueError(f"add_noise: sigma must be nonnegative, got {sigma}")
    u = np.asarray(u, dtype=np.float64)
    if sigma == 0.0:
        return u.copy()
    rng = np.random.default_rng(seed)
    return u + sigma * rng.standard_normal(u.shape)
