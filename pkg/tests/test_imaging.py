"""Imaging kernel tests: IO round trips, HSV conversions, and oracle
comparisons for blur, erosion, and resize."""

from __future__ import annotations

import numpy as np
import pytest

from seedlingcv.errors import CorruptImageError, ImageError, UnsupportedFormatError
from seedlingcv.imaging import (
    BinaryMask,
    HsvPixel,
    HsvRange,
    RasterImage,
    _hsv_planes,
    _round_u8,
    apply_mask,
    encode_ppm,
    erode,
    gaussian_blur,
    gaussian_kernel,
    hsv_mask,
    hsv_to_rgb,
    read_image,
    resize_bilinear,
    rgb_to_hsv,
    write_image,
)
from seedlingcv.tensor import SeededRng

from conftest import random_u8_image


def blur_oracle(img: RasterImage, size: int, sigma: float) -> np.ndarray:
    """Dense 2-D convolution with the outer-product kernel, edge clamped."""
    k1 = gaussian_kernel(size, sigma)
    k2 = np.outer(k1, k1)
    r = size // 2
    padded = np.pad(img.data.astype(np.float64), ((r, r), (r, r), (0, 0)), mode="edge")
    out = np.zeros(img.data.shape, dtype=np.float64)
    for y in range(img.height):
        for x in range(img.width):
            patch = padded[y:y + size, x:x + size, :]
            out[y, x, :] = (patch * k2[:, :, None]).sum(axis=(0, 1))
    return out


def erode_oracle(mask: BinaryMask, size: int) -> np.ndarray:
    """Direct min filter; neighbours outside the image count as background."""
    r = size // 2
    h, w = mask.data.shape
    out = np.zeros((h, w), dtype=bool)
    for y in range(h):
        for x in range(w):
            if y - r < 0 or x - r < 0 or y + r >= h or x + r >= w:
                out[y, x] = False
            else:
                out[y, x] = bool(mask.data[y - r:y + r + 1, x - r:x + r + 1].all())
    return out


def test_raster_image_validation():
    img = RasterImage(np.zeros((4, 5), dtype=np.uint8))
    assert img.channels == 1 and img.to_rgb().channels == 3
    with pytest.raises(ValueError):
        RasterImage(np.zeros((4, 5, 2), dtype=np.uint8))
    with pytest.raises(ValueError):
        RasterImage(np.zeros((0, 5, 3), dtype=np.uint8))


def test_round_u8_half_away_from_zero():
    vals = np.array([0.0, 0.49, 0.5, 1.5, 2.5, 254.5, 270.0])
    assert _round_u8(vals).tolist() == [0, 0, 1, 2, 3, 255, 255]


def test_gaussian_kernel_properties():
    k = gaussian_kernel(5, 1.0)
    assert k.shape == (5,)
    assert abs(k.sum() - 1.0) < 1e-12
    assert np.array_equal(k, k[::-1])
    assert k[2] == k.max()
    with pytest.raises(ValueError):
        gaussian_kernel(4, 1.0)
    with pytest.raises(ValueError):
        gaussian_kernel(5, 0.0)


def test_blur_matches_dense_oracle():
    rng = SeededRng(21)
    for case in range(20):
        h = 3 + rng.randint(8)
        w = 3 + rng.randint(8)
        size = [1, 3, 5][rng.randint(3)]
        sigma = 0.5 + float(rng.uniform(1)[0]) * 2.0
        img = random_u8_image(rng, h, w)
        got = gaussian_blur(img, size, sigma)
        want = _round_u8(blur_oracle(img, size, sigma))
        assert np.abs(got.data.astype(int) - want.astype(int)).max() <= 1, f"case {case}"


def test_blur_constant_image_is_identity():
    img = RasterImage(np.full((6, 7, 3), 137, dtype=np.uint8))
    assert gaussian_blur(img, 5, 1.0) == img


def test_erode_matches_min_filter_oracle():
    rng = SeededRng(33)
    for case in range(20):
        h = 3 + rng.randint(12)
        w = 3 + rng.randint(12)
        size = [1, 3, 5][rng.randint(3)]
        mask = BinaryMask(rng.uniform(h * w).reshape(h, w) < 0.7)
        got = erode(mask, size)
        assert np.array_equal(got.data, erode_oracle(mask, size)), f"case {case}"


def test_erode_all_true_loses_border():
    mask = BinaryMask(np.ones((7, 9), dtype=bool))
    out = erode(mask, 3)
    assert out.data[1:-1, 1:-1].all()
    assert not out.data[0].any() and not out.data[-1].any()
    assert not out.data[:, 0].any() and not out.data[:, -1].any()


def test_rgb_to_hsv_anchors():
    assert rgb_to_hsv(0, 0, 0) == HsvPixel(0.0, 0.0, 0.0)
    assert rgb_to_hsv(255, 255, 255) == HsvPixel(0.0, 0.0, 1.0)
    assert rgb_to_hsv(255, 0, 0) == HsvPixel(0.0, 1.0, 1.0)
    assert rgb_to_hsv(0, 255, 0) == HsvPixel(120.0, 1.0, 1.0)
    assert rgb_to_hsv(0, 0, 255) == HsvPixel(240.0, 1.0, 1.0)
    h, s, v = rgb_to_hsv(255, 255, 0)
    assert h == 60.0 and s == 1.0 and v == 1.0
    # negative (g - b) must wrap into [0, 360)
    h, _, _ = rgb_to_hsv(255, 0, 1)
    assert 0.0 <= h < 360.0


def test_hsv_round_trip_within_one_step():
    rng = SeededRng(77)
    for _ in range(1000):
        r, g, b = (int(v) for v in np.floor(rng.uniform(3) * 256.0).clip(0, 255))
        h, s, v = rgb_to_hsv(r, g, b)
        assert 0.0 <= h < 360.0 and 0.0 <= s <= 1.0 and 0.0 <= v <= 1.0
        r2, g2, b2 = hsv_to_rgb(h, s, v)
        assert abs(r - r2) <= 1 and abs(g - g2) <= 1 and abs(b - b2) <= 1


def test_vectorized_hsv_matches_scalar():
    rng = SeededRng(13)
    img = random_u8_image(rng, 9, 11)
    h, s, v = _hsv_planes(img)
    for y in range(img.height):
        for x in range(img.width):
            ref = rgb_to_hsv(*(int(c) for c in img.data[y, x]))
            assert h[y, x] == ref.h and s[y, x] == ref.s and v[y, x] == ref.v


def test_hsv_range_wraparound():
    wrap = HsvRange(h_lo=350.0, h_hi=10.0, s_lo=0.0, s_hi=1.0, v_lo=0.0, v_hi=1.0)
    assert wrap.contains(HsvPixel(355.0, 0.5, 0.5))
    assert wrap.contains(HsvPixel(5.0, 0.5, 0.5))
    assert not wrap.contains(HsvPixel(180.0, 0.5, 0.5))
    with pytest.raises(ValueError):
        HsvRange(0.0, 360.0, 0.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        HsvRange(0.0, 10.0, 0.8, 0.2, 0.0, 1.0)


def test_hsv_mask_agrees_with_scalar_contains():
    rng = SeededRng(4)
    ranges = [
        HsvRange(50.0, 160.0, 0.15, 1.0, 0.15, 1.0),
        HsvRange(300.0, 60.0, 0.0, 1.0, 0.2, 0.9),
    ]
    for hsv_range in ranges:
        img = random_u8_image(rng, 8, 8)
        mask = hsv_mask(img, hsv_range)
        for y in range(8):
            for x in range(8):
                pix = rgb_to_hsv(*(int(c) for c in img.data[y, x]))
                assert mask.data[y, x] == hsv_range.contains(pix)


def test_apply_mask():
    img = RasterImage(np.full((2, 2, 3), 200, dtype=np.uint8))
    mask = BinaryMask([[True, False], [False, True]])
    out = apply_mask(img, mask)
    assert out.data[0, 0].tolist() == [200, 200, 200]
    assert out.data[0, 1].tolist() == [0, 0, 0]
    with pytest.raises(ValueError):
        apply_mask(img, BinaryMask(np.ones((3, 3), dtype=bool)))


def resize_oracle(img: RasterImage, out_w: int, out_h: int) -> np.ndarray:
    out = np.zeros((out_h, out_w, img.channels), dtype=np.float64)
    for y in range(out_h):
        sy = min(max((y + 0.5) * img.height / out_h - 0.5, 0.0), img.height - 1.0)
        y0 = int(np.floor(sy)); y1 = min(y0 + 1, img.height - 1); fy = sy - y0
        for x in range(out_w):
            sx = min(max((x + 0.5) * img.width / out_w - 0.5, 0.0), img.width - 1.0)
            x0 = int(np.floor(sx)); x1 = min(x0 + 1, img.width - 1); fx = sx - x0
            top = img.data[y0, x0] * (1 - fx) + img.data[y0, x1] * fx
            bot = img.data[y1, x0] * (1 - fx) + img.data[y1, x1] * fx
            out[y, x] = top * (1 - fy) + bot * fy
    return out


def test_resize_identity_and_oracle():
    rng = SeededRng(55)
    img = random_u8_image(rng, 13, 9)
    assert resize_bilinear(img, 9, 13) == img
    for out_w, out_h in ((4, 7), (18, 26), (1, 1), (9, 13)):
        got = resize_bilinear(img, out_w, out_h)
        want = _round_u8(resize_oracle(img, out_w, out_h))
        assert np.array_equal(got.data, want), (out_w, out_h)
    with pytest.raises(ValueError):
        resize_bilinear(img, 0, 5)


def test_ppm_round_trip(tmp_path):
    rng = SeededRng(6)
    img = random_u8_image(rng, 11, 7)
    p = tmp_path / "out.ppm"
    write_image(img, p)
    assert read_image(p) == img


def test_ppm_header_comments_and_maxval(tmp_path):
    pixels = bytes([0, 5, 10, 10, 5, 0, 5, 10, 0, 0, 10, 5])
    raw = b"P6\n# a comment\n2 2\n# more\n10\n" + pixels
    p = tmp_path / "scaled.ppm"
    p.write_bytes(raw)
    img = read_image(p)
    # maxval 10 rescales 0..10 to 0..255
    assert img.data[0, 0].tolist() == [0, 128, 255]


def test_ppm_truncated(tmp_path):
    p = tmp_path / "bad.ppm"
    p.write_bytes(b"P6\n4 4\n255\n" + b"\x00" * 10)
    with pytest.raises(CorruptImageError):
        read_image(p)


def test_png_round_trip(tmp_path):
    rng = SeededRng(63)
    img = random_u8_image(rng, 16, 12)
    p = tmp_path / "img.png"
    write_image(img, p)
    assert read_image(p) == img


def test_read_image_errors(tmp_path):
    with pytest.raises(ImageError):
        read_image(tmp_path / "missing.png")
    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"GIF89a not supported here")
    with pytest.raises(UnsupportedFormatError):
        read_image(junk)
    broken = tmp_path / "broken.png"
    broken.write_bytes(b"\x89PNG\r\n\x1a\n" + b"\x00" * 20)
    with pytest.raises(CorruptImageError):
        read_image(broken)
    with pytest.raises(UnsupportedFormatError):
        write_image(RasterImage(np.zeros((2, 2, 3), dtype=np.uint8)), tmp_path / "x.bmp")
