"""Built-in synthetic dataset: 12 classes of colored shapes on textured
non-green backgrounds.

A class is a (shape, hue band) pair: four shapes (bar, disc, square,
triangle) times three green hue bands (70, 105, 140 degrees). Foreground
hues stay inside the default segmentation range; background hues, noise
included, stay outside it, so segmentation isolates the shape cleanly
while the raw images keep gradients, speckle, and low-saturation stones
as distractors. Every shape is thick enough to survive the default
11x11 erosion with its silhouette intact. Every draw comes from one
seeded stream, so a seed pins the whole dataset.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .imaging import RasterImage, write_image
from .tensor import SeededRng

SHAPES = ("bar", "disc", "square", "triangle")
HUE_BANDS = (70.0, 105.0, 140.0)

CLASS_NAMES = tuple(f"{shape}_h{int(hue):03d}" for shape in SHAPES for hue in HUE_BANDS)


def _uniform(rng: SeededRng, lo: float, hi: float, shape=None) -> np.ndarray | float:
    if shape is None:
        return lo + (hi - lo) * rng.uniform(1)[0]
    size = int(np.prod(shape))
    return lo + (hi - lo) * rng.uniform(size).reshape(shape)


def _hsv_to_rgb_array(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    h = np.mod(h, 360.0)
    c = v * s
    x = c * (1.0 - np.abs(np.mod(h / 60.0, 2.0) - 1.0))
    m = v - c
    sector = (h // 60.0).astype(np.int64) % 6
    zeros = np.zeros_like(c)
    r1 = np.select([sector == 0, sector == 1, sector == 2, sector == 3, sector == 4, sector == 5],
                   [c, x, zeros, zeros, x, c])
    g1 = np.select([sector == 0, sector == 1, sector == 2, sector == 3, sector == 4, sector == 5],
                   [x, c, c, x, zeros, zeros])
    b1 = np.select([sector == 0, sector == 1, sector == 2, sector == 3, sector == 4, sector == 5],
                   [zeros, zeros, x, c, c, x])
    rgb = np.stack([r1 + m, g1 + m, b1 + m], axis=-1)
    return np.clip(np.floor(rgb * 255.0 + 0.5), 0, 255).astype(np.uint8)


def _shape_mask(shape: str, size: int, cx: float, cy: float, radius: float,
                angle: float) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    dx = xx - cx
    dy = yy - cy
    if shape == "disc":
        return dx * dx + dy * dy <= radius * radius
    cos_a, sin_a = math.cos(angle), math.sin(angle)
    rx = cos_a * dx + sin_a * dy
    ry = -sin_a * dx + cos_a * dy
    if shape == "bar":
        # wide enough that an 11x11 square fits inside at any rotation
        half_len = radius * 1.15
        half_width = max(8.5, radius * 0.5)
        return (np.abs(rx) <= half_len) & (np.abs(ry) <= half_width)
    if shape == "square":
        half = radius * 0.9
        return (np.abs(rx) <= half) & (np.abs(ry) <= half)
    if shape == "triangle":
        big = radius * 1.5
        verts = [
            (big * math.cos(a), big * math.sin(a))
            for a in (math.pi / 2, math.pi / 2 + 2 * math.pi / 3, math.pi / 2 + 4 * math.pi / 3)
        ]
        inside = np.ones((size, size), dtype=bool)
        for (x0, y0), (x1, y1) in zip(verts, verts[1:] + verts[:1]):
            inside &= (x1 - x0) * (ry - y0) - (y1 - y0) * (rx - x0) >= 0
        return inside
    raise ValueError(f"unknown shape {shape!r}")


def make_image(rng: SeededRng, class_index: int, size: int = 64) -> RasterImage:
    """One synthetic sample for the given class."""
    if not 0 <= class_index < len(CLASS_NAMES):
        raise ValueError(f"class index must lie in [0, {len(CLASS_NAMES)}), got {class_index}")
    shape = SHAPES[class_index // len(HUE_BANDS)]
    hue_band = HUE_BANDS[class_index % len(HUE_BANDS)]

    # textured background: non-green base hue, value ramp, noise
    if _uniform(rng, 0.0, 1.0) < 0.5:
        base_hue = _uniform(rng, 190.0, 335.0)
    else:
        base_hue = _uniform(rng, 0.0, 32.0)
    h = base_hue + _uniform(rng, -10.0, 10.0, (size, size))
    s = np.clip(_uniform(rng, 0.30, 0.80) + _uniform(rng, -0.12, 0.12, (size, size)), 0.0, 1.0)
    ramp_dir = _uniform(rng, 0.0, 2.0 * math.pi)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) / (size - 1)
    ramp = xx * math.cos(ramp_dir) + yy * math.sin(ramp_dir)
    ramp = (ramp - ramp.min()) / max(ramp.max() - ramp.min(), 1e-9)
    v_lo, v_hi = sorted((_uniform(rng, 0.30, 0.95), _uniform(rng, 0.30, 0.95)))
    v = np.clip(v_lo + (v_hi - v_lo) * ramp + _uniform(rng, -0.08, 0.08, (size, size)), 0.05, 1.0)

    # low-saturation stones; excluded from the mask by the saturation bound
    for _ in range(2 + int(_uniform(rng, 0.0, 4.0))):
        scx = _uniform(rng, 0.0, size - 1.0)
        scy = _uniform(rng, 0.0, size - 1.0)
        sa = _uniform(rng, 2.5, 6.5)
        sb = _uniform(rng, 2.5, 6.5)
        syy, sxx = np.mgrid[0:size, 0:size].astype(np.float64)
        stone = ((sxx - scx) / sa) ** 2 + ((syy - scy) / sb) ** 2 <= 1.0
        h[stone] = _uniform(rng, 200.0, 300.0)
        s[stone] = _uniform(rng, 0.0, 0.10)
        v[stone] = _uniform(rng, 0.20, 0.90)

    # foreground shape in a green hue band; rotation stays within +/-15
    # degrees of a canonical orientation so silhouettes are learnable
    # from a couple hundred samples
    centre = (size - 1) / 2.0
    cx = centre + _uniform(rng, -6.0, 6.0)
    cy = centre + _uniform(rng, -6.0, 6.0)
    radius = _uniform(rng, 16.0, 19.0) * (size / 64.0)
    angle = _uniform(rng, -15.0, 15.0) * math.pi / 180.0
    mask = _shape_mask(shape, size, cx, cy, radius, angle)

    fg_h = hue_band + _uniform(rng, -6.0, 6.0) + _uniform(rng, -4.0, 4.0, (size, size))
    fg_s = np.clip(_uniform(rng, 0.65, 0.95) + _uniform(rng, -0.08, 0.08, (size, size)), 0.5, 1.0)
    fg_v = np.clip(_uniform(rng, 0.60, 0.95) + _uniform(rng, -0.08, 0.08, (size, size)), 0.4, 1.0)
    h = np.where(mask, fg_h, h)
    s = np.where(mask, fg_s, s)
    v = np.where(mask, fg_v, v)
    return RasterImage(_hsv_to_rgb_array(h, s, v))


def balanced_counts(total: int) -> list[int]:
    """Spread total items over the 12 classes as evenly as possible."""
    k = len(CLASS_NAMES)
    base, extra = divmod(total, k)
    return [base + (1 if i < extra else 0) for i in range(k)]


def make_images(rng: SeededRng, counts, size: int = 64) -> list[tuple[RasterImage, int]]:
    items = []
    for class_index, count in enumerate(counts):
        for _ in range(count):
            items.append((make_image(rng, class_index, size), class_index))
    return items


def make_split(seed: int, n_train: int = 200, n_val: int = 60, size: int = 64):
    """(train items, val items, class names) drawn from one seeded stream."""
    rng = SeededRng(seed)
    train = make_images(rng, balanced_counts(n_train), size)
    val = make_images(rng, balanced_counts(n_val), size)
    return train, val, list(CLASS_NAMES)


def write_tree(out_dir, seed: int, per_class: int, size: int = 64) -> int:
    """Write a class-per-directory PNG tree; returns the image count."""
    rng = SeededRng(seed)
    out_dir = Path(out_dir)
    written = 0
    for class_index, name in enumerate(CLASS_NAMES):
        class_dir = out_dir / name
        class_dir.mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            write_image(make_image(rng, class_index, size), class_dir / f"img_{i:03d}.png")
            written += 1
    return written
