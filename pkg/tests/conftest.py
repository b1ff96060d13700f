"""Shared test helpers: finite differences and tiny dataset trees."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from seedlingcv.imaging import RasterImage, write_image
from seedlingcv.tensor import SeededRng


def central_difference(f, x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Numerical gradient of a scalar-valued f at x, one coordinate at a time."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + eps
        hi = f(x)
        flat[i] = keep - eps
        lo = f(x)
        flat[i] = keep
        gflat[i] = (hi - lo) / (2.0 * eps)
    return grad


def relative_error(approx: np.ndarray, exact: np.ndarray) -> float:
    num = np.abs(approx - exact).max()
    den = max(np.abs(approx).max(), np.abs(exact).max(), 1e-12)
    return float(num / den)


def random_u8_image(rng: SeededRng, h: int, w: int, channels: int = 3) -> RasterImage:
    vals = np.floor(rng.uniform(h * w * channels) * 256.0).clip(0, 255)
    return RasterImage(vals.reshape(h, w, channels).astype(np.uint8))


@pytest.fixture
def tiny_tree(tmp_path: Path) -> Path:
    """Two-class PNG tree, three and two images."""
    rng = SeededRng(5)
    root = tmp_path / "data"
    for name, count in (("classa", 3), ("classb", 2)):
        d = root / name
        d.mkdir(parents=True)
        for i in range(count):
            write_image(random_u8_image(rng, 20, 16), d / f"im{i}.png")
    return root
