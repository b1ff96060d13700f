"""Raster images and the pixel kernels behind background segmentation.

Conventions used throughout:

- images are 8-bit, row-major, interleaved channels, stored as a
  C-contiguous uint8 array of shape (height, width, channels) with
  channels 1 or 3;
- HSV uses H in [0, 360) degrees and S, V in [0, 1], independent of any
  library's integer encodings;
- float kernels round back to 8 bits with round-half-away-from-zero;
- blur clamps borders to the edge pixel, erosion treats out-of-bounds
  neighbours as background, so neither ever invents foreground at the
  image border.

PNG decode/encode is delegated to Pillow; binary PPM (P6) is parsed and
written here because golden tests rely on its bit-exact layout.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
import PIL.Image

from .errors import CorruptImageError, ImageError, UnsupportedFormatError

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class RasterImage:
    """H x W x C interleaved 8-bit image."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.ascontiguousarray(np.asarray(data, dtype=np.uint8))
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise ValueError(f"image data must be HxWxC, got shape {arr.shape}")
        h, w, c = arr.shape
        if c not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {c}")
        if h < 1 or w < 1:
            raise ValueError(f"image must be at least 1x1, got {w}x{h}")
        self.data = arr

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def to_rgb(self) -> "RasterImage":
        """This image with a single channel expanded to 3 identical ones."""
        if self.channels == 3:
            return self
        return RasterImage(np.repeat(self.data, 3, axis=2))

    def __eq__(self, other) -> bool:
        return isinstance(other, RasterImage) and np.array_equal(self.data, other.data)

    def __repr__(self) -> str:
        return f"RasterImage({self.width}x{self.height}x{self.channels})"


class BinaryMask:
    """Row-major boolean mask with image dimensions."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.ascontiguousarray(np.asarray(data, dtype=bool))
        if arr.ndim != 2:
            raise ValueError(f"mask data must be HxW, got shape {arr.shape}")
        self.data = arr

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other) -> bool:
        return isinstance(other, BinaryMask) and np.array_equal(self.data, other.data)


class HsvPixel(NamedTuple):
    h: float  # degrees, [0, 360)
    s: float  # [0, 1]
    v: float  # [0, 1]


@dataclass(frozen=True)
class HsvRange:
    """Inclusive HSV bounds; h_lo > h_hi selects the hue arc through 0."""

    h_lo: float
    h_hi: float
    s_lo: float
    s_hi: float
    v_lo: float
    v_hi: float

    def __post_init__(self):
        for name, lo, hi in (("s", self.s_lo, self.s_hi), ("v", self.v_lo, self.v_hi)):
            if lo > hi:
                raise ValueError(f"{name}_lo > {name}_hi: {lo} > {hi}")
            if lo < 0 or hi > 1:
                raise ValueError(f"{name} bounds must lie in [0, 1]")
        for h in (self.h_lo, self.h_hi):
            if h < 0 or h >= 360:
                raise ValueError(f"hue bounds must lie in [0, 360), got {h}")

    def contains(self, pixel: HsvPixel) -> bool:
        h, s, v = pixel
        if self.h_lo <= self.h_hi:
            hue_ok = self.h_lo <= h <= self.h_hi
        else:  # wraparound through 0 degrees
            hue_ok = h >= self.h_lo or h <= self.h_hi
        return hue_ok and self.s_lo <= s <= self.s_hi and self.v_lo <= v <= self.v_hi


def _round_u8(values: np.ndarray) -> np.ndarray:
    # round-half-away-from-zero; inputs here are never negative
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------

def _read_ppm(raw: bytes, path) -> RasterImage:
    pos = 2  # past "P6"
    fields = []
    while len(fields) < 3:
        if pos >= len(raw):
            raise CorruptImageError(path, "PPM header ended early")
        ch = raw[pos:pos + 1]
        if ch == b"#":
            while pos < len(raw) and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        elif ch.isdigit():
            start = pos
            while pos < len(raw) and raw[pos:pos + 1].isdigit():
                pos += 1
            fields.append(int(raw[start:pos]))
        else:
            raise CorruptImageError(path, f"unexpected byte {ch!r} in PPM header")
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise CorruptImageError(path, f"bad PPM dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise UnsupportedFormatError(path, f"PPM maxval {maxval} not supported")
    need = width * height * 3
    pixels = raw[pos:pos + need]
    if len(pixels) < need:
        raise CorruptImageError(path, f"PPM pixel data truncated ({len(pixels)}/{need} bytes)")
    arr = np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 3)
    if maxval != 255:
        arr = _round_u8(arr.astype(np.float64) * (255.0 / maxval))
    return RasterImage(arr)


def _read_png(raw: bytes, path) -> RasterImage:
    try:
        with PIL.Image.open(io.BytesIO(raw)) as img:
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except Exception as exc:
        raise CorruptImageError(path, f"PNG stream not decodable ({exc})") from None
    return RasterImage(arr)


def read_image(path) -> RasterImage:
    """Decode a PNG or binary PPM (P6) file into a 3-channel image."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ImageError(path, f"cannot read file ({exc.strerror or exc})") from None
    if raw.startswith(_PNG_MAGIC):
        return _read_png(raw, path).to_rgb()
    if raw.startswith(b"P6"):
        return _read_ppm(raw, path)
    raise UnsupportedFormatError(path, "not a PNG or binary PPM (P6) file")


def encode_ppm(img: RasterImage) -> bytes:
    rgb = img.to_rgb()
    header = f"P6\n{rgb.width} {rgb.height}\n255\n".encode("ascii")
    return header + rgb.data.tobytes()


def write_image(img: RasterImage, path) -> None:
    """Write losslessly as PPM (P6) or PNG, chosen by file extension."""
    path = Path(path)
    ext = path.suffix.lower()
    try:
        if ext == ".ppm":
            path.write_bytes(encode_ppm(img))
        elif ext == ".png":
            arr = img.data[:, :, 0] if img.channels == 1 else img.data
            PIL.Image.fromarray(arr).save(path, format="PNG")
        else:
            raise UnsupportedFormatError(path, f"unknown output extension {ext!r}")
    except OSError as exc:
        raise ImageError(path, f"cannot write file ({exc.strerror or exc})") from None


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """1-D Gaussian taps w_i ~ exp(-(i-c)^2 / (2 sigma^2)), normalized to sum 1."""
    if size < 1 or size % 2 == 0:
        raise ValueError(f"kernel size must be odd and >= 1, got {size}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    centre = (size - 1) / 2.0
    offsets = np.arange(size, dtype=np.float64) - centre
    weights = np.exp(-(offsets ** 2) / (2.0 * sigma * sigma))
    return weights / weights.sum()


def gaussian_blur(img: RasterImage, size: int, sigma: float) -> RasterImage:
    """Separable Gaussian blur with edge-clamped borders."""
    kernel = gaussian_kernel(size, sigma)
    r = size // 2
    acc = img.data.astype(np.float64)
    if r > 0:
        padded = np.pad(acc, ((0, 0), (r, r), (0, 0)), mode="edge")
        acc = sum(kernel[j] * padded[:, j:j + img.width, :] for j in range(size))
        padded = np.pad(acc, ((r, r), (0, 0), (0, 0)), mode="edge")
        acc = sum(kernel[j] * padded[j:j + img.height, :, :] for j in range(size))
    return RasterImage(_round_u8(acc))


def rgb_to_hsv(r: int, g: int, b: int) -> HsvPixel:
    """Hexcone HSV of one 8-bit RGB triple."""
    mx = max(r, g, b)
    mn = min(r, g, b)
    v = mx / 255.0
    s = 0.0 if mx == 0 else (mx - mn) / mx
    if mx == mn:
        h = 0.0
    elif mx == r:
        h = (60.0 * (g - b) / (mx - mn)) % 360.0
    elif mx == g:
        h = 60.0 * ((b - r) / (mx - mn) + 2.0)
    else:
        h = 60.0 * ((r - g) / (mx - mn) + 4.0)
    return HsvPixel(h, s, v)


def hsv_to_rgb(h: float, s: float, v: float) -> tuple[int, int, int]:
    """Inverse hexcone transform back to an 8-bit RGB triple."""
    h = h % 360.0
    c = v * s
    x = c * (1.0 - abs((h / 60.0) % 2.0 - 1.0))
    m = v - c
    sector = int(h // 60.0) % 6
    rgb1 = [(c, x, 0.0), (x, c, 0.0), (0.0, c, x), (0.0, x, c), (x, 0.0, c), (c, 0.0, x)][sector]
    return tuple(int(np.clip(np.floor((ch + m) * 255.0 + 0.5), 0, 255)) for ch in rgb1)


def _hsv_planes(img: RasterImage) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # vectorized rgb_to_hsv over the whole image
    rgb = img.data.astype(np.float64)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    mx = rgb.max(axis=2)
    mn = rgb.min(axis=2)
    delta = mx - mn
    v = mx / 255.0
    s = np.where(mx == 0, 0.0, delta / np.where(mx == 0, 1.0, mx))
    safe = np.where(delta == 0, 1.0, delta)
    h = np.zeros_like(mx)
    h = np.where(mx == r, (60.0 * (g - b) / safe) % 360.0, h)
    h = np.where((mx == g) & (mx != r), 60.0 * ((b - r) / safe + 2.0), h)
    h = np.where((mx == b) & (mx != r) & (mx != g), 60.0 * ((r - g) / safe + 4.0), h)
    h = np.where(delta == 0, 0.0, h)
    return h, s, v


def hsv_mask(img: RasterImage, rng: HsvRange) -> BinaryMask:
    """Pixels whose HSV triple lies inside the range."""
    if img.channels != 3:
        raise ValueError("hsv_mask needs a 3-channel image")
    h, s, v = _hsv_planes(img)
    if rng.h_lo <= rng.h_hi:
        hue_ok = (h >= rng.h_lo) & (h <= rng.h_hi)
    else:
        hue_ok = (h >= rng.h_lo) | (h <= rng.h_hi)
    inside = hue_ok & (s >= rng.s_lo) & (s <= rng.s_hi) & (v >= rng.v_lo) & (v <= rng.v_hi)
    return BinaryMask(inside)


def erode(mask: BinaryMask, size: int) -> BinaryMask:
    """Erosion by a full size x size square; out-of-bounds counts as false.

    The square element makes the min-filter separable: erode rows, then
    columns.
    """
    if size < 1 or size % 2 == 0:
        raise ValueError(f"structuring element size must be odd and >= 1, got {size}")
    r = size // 2
    if r == 0:
        return BinaryMask(mask.data.copy())
    h, w = mask.data.shape
    padded = np.pad(mask.data, ((0, 0), (r, r)), mode="constant", constant_values=False)
    rows = np.logical_and.reduce([padded[:, j:j + w] for j in range(size)])
    padded = np.pad(rows, ((r, r), (0, 0)), mode="constant", constant_values=False)
    out = np.logical_and.reduce([padded[j:j + h, :] for j in range(size)])
    return BinaryMask(out)


def apply_mask(img: RasterImage, mask: BinaryMask) -> RasterImage:
    """Copy pixels under true, zero the rest."""
    if (img.height, img.width) != (mask.height, mask.width):
        raise ValueError(
            f"mask {mask.width}x{mask.height} does not match image {img.width}x{img.height}"
        )
    return RasterImage(img.data * mask.data[:, :, np.newaxis])


def resize_bilinear(img: RasterImage, out_w: int, out_h: int) -> RasterImage:
    """Bilinear resize with pixel-centre alignment.

    Source coordinate for destination index d is (d + 0.5) * scale - 0.5,
    clamped to the source bounds, so a same-size resize is the identity.
    """
    if out_w < 1 or out_h < 1:
        raise ValueError(f"target size must be at least 1x1, got {out_w}x{out_h}")

    def axis_coords(src: int, dst: int):
        coords = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
        coords = np.clip(coords, 0.0, src - 1.0)
        lo = np.floor(coords).astype(np.int64)
        hi = np.minimum(lo + 1, src - 1)
        return lo, hi, coords - lo

    x0, x1, fx = axis_coords(img.width, out_w)
    y0, y1, fy = axis_coords(img.height, out_h)
    src = img.data.astype(np.float64)
    top = src[y0][:, x0] * (1.0 - fx)[None, :, None] + src[y0][:, x1] * fx[None, :, None]
    bottom = src[y1][:, x0] * (1.0 - fx)[None, :, None] + src[y1][:, x1] * fx[None, :, None]
    blended = top * (1.0 - fy)[:, None, None] + bottom * fy[:, None, None]
    return RasterImage(_round_u8(blended))
