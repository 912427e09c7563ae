"""Float-map and PGM export formats."""

import numpy as np
import pytest

from imgskip.imageio import read_pfm, write_pfm, write_pgm


def test_pfm_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    img = rng.standard_normal((5, 8))
    path = tmp_path / "img.pfm"
    write_pfm(path, img)
    back = read_pfm(path)
    np.testing.assert_allclose(back, img.astype(np.float32), rtol=0, atol=0)


def test_pfm_header_layout(tmp_path):
    img = np.arange(6.0).reshape(2, 3)
    path = tmp_path / "img.pfm"
    write_pfm(path, img)
    raw = path.read_bytes()
    header = b"Pf\n3 2\n-1.0\n"
    assert raw.startswith(header)
    payload = np.frombuffer(raw[len(header):], dtype="<f4")
    # Row-major, top row first.
    np.testing.assert_allclose(payload, np.arange(6.0, dtype=np.float32))


def test_pfm_rejects_non_2d(tmp_path):
    with pytest.raises(ValueError):
        write_pfm(tmp_path / "x.pfm", np.zeros((2, 2, 2)))


def test_read_pfm_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.pfm"
    path.write_bytes(b"PF\n1 1\n-1.0\n" + b"\x00" * 4)
    with pytest.raises(ValueError):
        read_pfm(path)


def test_read_pfm_rejects_big_endian(tmp_path):
    path = tmp_path / "be.pfm"
    path.write_bytes(b"Pf\n1 1\n1.0\n" + b"\x00" * 4)
    with pytest.raises(ValueError):
        read_pfm(path)


def test_read_pfm_rejects_truncated(tmp_path):
    path = tmp_path / "short.pfm"
    path.write_bytes(b"Pf\n2 2\n-1.0\n" + b"\x00" * 8)
    with pytest.raises(ValueError):
        read_pfm(path)


def test_pgm_rescales_range(tmp_path):
    img = np.array([[0.0, 0.5], [1.0, 0.25]])
    path = tmp_path / "img.pgm"
    write_pgm(path, img)
    raw = path.read_bytes()
    assert raw.startswith(b"P5\n2 2\n255\n")
    pixels = np.frombuffer(raw[len(b"P5\n2 2\n255\n"):], dtype=np.uint8)
    assert pixels.min() == 0 and pixels.max() == 255


def test_pgm_constant_image(tmp_path):
    path = tmp_path / "flat.pgm"
    write_pgm(path, np.full((3, 3), 7.0))
    pixels = np.frombuffer(path.read_bytes().split(b"255\n", 1)[1], dtype=np.uint8)
    assert np.all(pixels == 0)
