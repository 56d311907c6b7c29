"""Raster value types, PNG I/O, and the geometric operations shared by the pipeline.

Two raster kinds exist: 8-bit RGB images (scene photographs, HUD content) and
real-valued single-channel maps on a nominal [0, 255] scale (saliency maps and
every intermediate map). Maps stay floating point end to end; quantization to
8 bits happens only on PNG export. All values are frozen after construction,
so they can be shared between threads without copying.

Resampling convention, pinned for reproducibility: origin at the top-left,
x right / y down, pixel centers at integer + 0.5, bilinear interpolation with
edge-clamped sampling.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import ValidationError

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True)
class RgbImage:
    """8-bit three-channel raster; ``data`` has shape (height, width, 3)."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValidationError(f"RGB image data must have shape (h, w, 3), got {arr.shape}")
        if arr.dtype != np.uint8:
            raise ValidationError(f"RGB image data must be uint8, got {arr.dtype}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError("image must be at least 1x1")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class GrayMap:
    """Real-valued single-channel raster on a nominal [0, 255] scale.

    Values must be finite. Saliency maps and rectified feature maps are
    nonnegative by construction of the operations that produce them;
    accumulated intermediates may exceed 255. Signed difference maps use
    the dedicated type in the interference module.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError(f"map data must be two-dimensional, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError("map must be at least 1x1")
        if not np.isfinite(arr).all():
            raise ValidationError("map values must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class Region:
    """Axis-aligned pixel rectangle: left, top, width, height."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise ValidationError(f"region {name} must be an integer, got {value!r}")
        if self.x < 0 or self.y < 0:
            raise ValidationError(f"region origin must be nonnegative, got ({self.x}, {self.y})")
        if self.w < 1:
            raise ValidationError(f"region width must be >= 1, got {self.w}")
        if self.h < 1:
            raise ValidationError(f"region height must be >= 1, got {self.h}")

    def validate_within(self, width: int, height: int) -> None:
        """Reject regions that do not fit inside a width x height raster."""
        if self.x + self.w > width or self.y + self.h > height:
            raise ValidationError(
                f"region ({self.x}, {self.y}, {self.w}, {self.h}) exceeds "
                f"the {width}x{height} raster bounds"
            )


def _read_png_bit_depth(path: str | os.PathLike) -> int:
    """Read the IHDR bit depth of a PNG file, rejecting non-PNG data."""
    with open(path, "rb") as fh:
        header = fh.read(25)
    if header[:8] != _PNG_SIGNATURE:
        raise ValidationError(f"{path}: not a PNG file")
    if len(header) < 25:
        raise OSError(f"{path}: truncated PNG header")
    return header[24]


def load_png(path: str | os.PathLike) -> RgbImage:
    """Load an 8-bit PNG as an RGB image.

    Grayscale inputs are promoted to RGB by channel replication; palette
    images are expanded. No color management is applied: stored sample
    values pass through unchanged.

    Raises:
        ValidationError: not a PNG, 16-bit depth, or an unsupported mode
            (alpha channels are rejected, their meaning is undefined here).
        OSError: unreadable or truncated file.
    """
    depth = _read_png_bit_depth(path)
    if depth == 16:
        raise ValidationError(f"{path}: 16-bit PNG not supported, re-encode as 8-bit")
    with Image.open(path) as img:
        img.load()
        if img.mode == "P":
            img = img.convert("RGB")
        if img.mode == "L":
            gray = np.asarray(img, dtype=np.uint8)
            return RgbImage(np.repeat(gray[:, :, None], 3, axis=2))
        if img.mode == "RGB":
            return RgbImage(np.asarray(img, dtype=np.uint8))
        raise ValidationError(f"{path}: unsupported PNG mode {img.mode!r}, expected grayscale or RGB")


def save_gray_png(map_: GrayMap, path: str | os.PathLike) -> None:
    """Write a map as an 8-bit grayscale PNG.

    Values are clamped to [0, 255] and rounded half-up to the nearest
    integer; this is the only place map values are quantized.
    """
    clamped = np.clip(map_.data, 0.0, 255.0)
    quantized = np.floor(clamped + 0.5).astype(np.uint8)
    Image.fromarray(quantized, mode="L").save(path, format="PNG")


def save_rgb_png(img: RgbImage, path: str | os.PathLike) -> None:
    """Write an RGB image as an 8-bit PNG, bit-exact."""
    Image.fromarray(np.asarray(img.data), mode="RGB").save(path, format="PNG")


def crop(map_: GrayMap, region: Region) -> GrayMap:
    """Cut the exact sub-rectangle out of a map; no resampling.

    Out-of-bounds regions are rejected, never clamped.
    """
    region.validate_within(map_.width, map_.height)
    block = map_.data[region.y : region.y + region.h, region.x : region.x + region.w]
    return GrayMap(block)


def resample_bilinear(arr: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    """Bilinear resize of a 2-D float array (see module docstring for the convention).

    Interpolation uses the ``a + f*(b - a)`` form, which reproduces constant
    inputs exactly and never leaves the [min, max] range of the input.
    """
    if target_w < 1 or target_h < 1:
        raise ValidationError(f"target size must be >= 1x1, got {target_w}x{target_h}")
    arr = np.asarray(arr, dtype=np.float64)
    in_h, in_w = arr.shape
    if (in_h, in_w) == (target_h, target_w):
        return arr.copy()

    def axis_samples(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        lo = np.floor(src).astype(np.int64)
        frac = src - lo
        return np.clip(lo, 0, n_in - 1), np.clip(lo + 1, 0, n_in - 1), frac

    x0, x1, fx = axis_samples(in_w, target_w)
    y0, y1, fy = axis_samples(in_h, target_h)
    top = arr[y0][:, x0]
    top = top + fx[None, :] * (arr[y0][:, x1] - top)
    bottom = arr[y1][:, x0]
    bottom = bottom + fx[None, :] * (arr[y1][:, x1] - bottom)
    out = top + fy[:, None] * (bottom - top)
    # the lerp form can drift past the input range by an ulp; pin the bound
    return np.clip(out, arr.min(), arr.max())


def resize_bilinear(map_: GrayMap, target_w: int, target_h: int) -> GrayMap:
    """Bilinear resize of a map; a same-size request returns a value-identical map."""
    if (map_.height, map_.width) == (target_h, target_w):
        return map_
    return GrayMap(resample_bilinear(map_.data, target_w, target_h))


def to_intensity(img: RgbImage) -> GrayMap:
    """Per-pixel intensity (r + g + b) / 3, unrounded."""
    d = img.data.astype(np.float64)
    return GrayMap((d[:, :, 0] + d[:, :, 1] + d[:, :, 2]) / 3.0)
