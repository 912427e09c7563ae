"""Grayscale image I/O: portable float maps for exact dumps, PGM for inspection.

The float map layout is a textual header ``Pf <width> <height> -1.0`` followed
by little-endian 32-bit floats, row-major, top row first.
"""

import numpy as np


def write_pfm(path, image):
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError(f"write_pfm: expected 2-D image, got shape {image.shape}")
    h, w = image.shape
    with open(path, "wb") as f:
        f.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        f.write(image.astype("<f4").tobytes())


def read_pfm(path):
    with open(path, "rb") as f:
        magic = f.readline().split()
        if magic[:1] != [b"Pf"]:
            raise ValueError(f"read_pfm: bad magic in {path}")
        w, h = (int(t) for t in f.readline().split())
        scale = float(f.readline())
        if scale >= 0:
            raise ValueError("read_pfm: big-endian float maps are not supported")
        data = np.frombuffer(f.read(4 * w * h), dtype="<f4")
        if data.size != w * h:
            raise ValueError(f"read_pfm: truncated payload in {path}")
        return data.reshape(h, w).astype(np.float64)


def write_pgm(path, image):
    """8-bit binary PGM with a linear rescale of the data range to [0, 255]."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError(f"write_pgm: expected 2-D image, got shape {image.shape}")
    lo, hi = float(image.min()), float(image.max())
    if hi > lo:
        scaled = (image - lo) / (hi - lo)
    else:
        scaled = np.zeros_like(image)
    pixels = np.clip(np.rint(scaled * 255.0), 0, 255).astype(np.uint8)
    h, w = image.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())
