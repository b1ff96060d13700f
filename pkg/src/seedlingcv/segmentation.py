"""Background segmentation pipeline and classifier input normalization.

The pipeline is: Gaussian blur for mask stability, HSV thresholding on
the blurred copy, erosion of the mask, then the eroded mask is applied
to the ORIGINAL image so classifiers see true pixel values rather than
blurred ones.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DatasetError, ImageError
from .imaging import BinaryMask, HsvRange, RasterImage, apply_mask, erode, gaussian_blur, hsv_mask, read_image, resize_bilinear, write_image

log = logging.getLogger(__name__)

DEFAULT_HSV_RANGE = HsvRange(h_lo=50.0, h_hi=160.0, s_lo=0.15, s_hi=1.0, v_lo=0.15, v_hi=1.0)

IMAGE_EXTENSIONS = (".png", ".ppm")


@dataclass(frozen=True)
class SegmentationConfig:
    blur_size: int = 5
    blur_sigma: float = 1.0
    hsv_range: HsvRange = field(default_factory=lambda: DEFAULT_HSV_RANGE)
    erode_size: int = 11

    def to_dict(self) -> dict:
        r = self.hsv_range
        return {
            "blur_size": self.blur_size,
            "blur_sigma": self.blur_sigma,
            "hsv_range": {
                "h_lo": r.h_lo, "h_hi": r.h_hi,
                "s_lo": r.s_lo, "s_hi": r.s_hi,
                "v_lo": r.v_lo, "v_hi": r.v_hi,
            },
            "erode_size": self.erode_size,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SegmentationConfig":
        kwargs = dict(data)
        if "hsv_range" in kwargs and isinstance(kwargs["hsv_range"], dict):
            kwargs["hsv_range"] = HsvRange(**kwargs["hsv_range"])
        return cls(**kwargs)


class NormalizedImage:
    """Planar (channel-major) float image with every value in [0, 1]."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
        if arr.ndim != 3 or arr.shape[0] != 3:
            raise ValueError(f"normalized image must be 3xHxW, got {arr.shape}")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("normalized values must lie in [0, 1]")
        self.data = arr

    @property
    def channels(self) -> int:
        return 3

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def flatten(self) -> np.ndarray:
        """Channel-major row vector of length 3*H*W."""
        return self.data.reshape(-1)


def foreground_mask(img: RasterImage, cfg: SegmentationConfig) -> BinaryMask:
    """The eroded HSV mask used by segment()."""
    blurred = gaussian_blur(img, cfg.blur_size, cfg.blur_sigma)
    return erode(hsv_mask(blurred, cfg.hsv_range), cfg.erode_size)


def segment(img: RasterImage, cfg: SegmentationConfig | None = None) -> RasterImage:
    """Blank out everything that does not look like seedling foreground."""
    cfg = cfg or SegmentationConfig()
    if img.channels != 3:
        raise ValueError("segment needs a 3-channel image")
    return apply_mask(img, foreground_mask(img, cfg))


def normalize(img: RasterImage, target_w: int, target_h: int) -> NormalizedImage:
    """Resize, standardize per image, then min-max rescale into [0, 1].

    A constant image (zero standard deviation) maps to all zeros.
    """
    resized = resize_bilinear(img.to_rgb(), target_w, target_h)
    values = resized.data.astype(np.float64)
    mu = values.mean()
    sigma = values.std()  # population std over all samples
    if sigma == 0.0:
        planar = np.zeros((3, target_h, target_w), dtype=np.float64)
        return NormalizedImage(planar)
    z = (values - mu) / sigma
    z = (z - z.min()) / (z.max() - z.min())
    return NormalizedImage(np.transpose(z, (2, 0, 1)))


def segment_directory(in_dir, out_dir, cfg: SegmentationConfig | None = None) -> tuple[int, int]:
    """Segment every image under in_dir into a mirrored tree at out_dir.

    Returns (written, skipped); undecodable images are skipped with a
    warning rather than aborting the batch.
    """
    cfg = cfg or SegmentationConfig()
    in_dir = Path(in_dir)
    out_dir = Path(out_dir)
    if not in_dir.is_dir():
        raise DatasetError(f"input directory not found: {in_dir}")
    written = 0
    skipped = 0
    for path in sorted(in_dir.rglob("*")):
        if not path.is_file() or path.suffix.lower() not in IMAGE_EXTENSIONS:
            continue
        rel = path.relative_to(in_dir)
        target = out_dir / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        try:
            img = read_image(path)
        except ImageError as exc:
            log.warning("skipping undecodable image: %s", exc)
            skipped += 1
            continue
        write_image(segment(img, cfg), target)
        written += 1
    return written, skipped
