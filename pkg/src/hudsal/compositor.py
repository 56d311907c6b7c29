"""Synthetic measured images: additive projection of HUD content over a scene.

A combiner HUD adds projected light to the transmitted scene light, so black
content is optically transparent. That is modeled literally: inside the
placement region the output is clamp(background + gain * hud, 0, 255) per
channel; outside it the background passes through untouched. Clamping at 255
stands in for camera sensor saturation. No geometric warp is simulated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .imagery import Region, RgbImage, resample_bilinear
from .interference import InterferenceResult, evaluate
from .saliency import SaliencyBackend

MAX_GAIN = 4.0


@dataclass(frozen=True)
class CompositeSpec:
    """Background frame, HUD content, placement region, and projector gain."""

    background: RgbImage
    hud: RgbImage
    region: Region
    gain: float = 1.0

    def __post_init__(self) -> None:
        self.region.validate_within(self.background.width, self.background.height)
        if not 0.0 < self.gain <= MAX_GAIN:
            raise ValidationError(f"gain must be in (0, {MAX_GAIN}], got {self.gain}")


def _resize_rgb(img: RgbImage, w: int, h: int) -> np.ndarray:
    channels = [resample_bilinear(img.data[:, :, c].astype(np.float64), w, h) for c in range(3)]
    return np.stack(channels, axis=2)


def composite(spec: CompositeSpec) -> RgbImage:
    """Render the measured image for a composite specification.

    The HUD content is bilinearly resized to the region dimensions before the
    additive blend. An all-black HUD leaves the background bit-identical, and
    pixels outside the region are never touched.
    """
    region = spec.region
    hud_resized = _resize_rgb(spec.hud, region.w, region.h)
    out = spec.background.data.copy()
    window = out[region.y : region.y + region.h, region.x : region.x + region.w].astype(np.float64)
    blended = window + spec.gain * hud_resized
    out[region.y : region.y + region.h, region.x : region.x + region.w] = np.clip(
        np.floor(blended + 0.5), 0.0, 255.0
    ).astype(np.uint8)
    return RgbImage(out)


def glyph_hud(glyph_mask: RgbImage, color: tuple[int, int, int]) -> RgbImage:
    """HUD image from a stencil: color scaled by the mask, on black.

    The mask must be achromatic (equal channels); mask value 255 paints the
    full color, 0 stays black, intermediate values scale the color linearly.
    """
    d = glyph_mask.data
    if not (np.array_equal(d[:, :, 0], d[:, :, 1]) and np.array_equal(d[:, :, 0], d[:, :, 2])):
        raise ValidationError("glyph mask must be a single-channel stencil (equal RGB channels)")
    for comp in color:
        if not 0 <= int(comp) <= 255:
            raise ValidationError(f"color components must be in [0, 255], got {color}")
    weight = d[:, :, 0].astype(np.float64) / 255.0
    hud = np.floor(weight[:, :, None] * np.asarray(color, dtype=np.float64) + 0.5)
    return RgbImage(hud.astype(np.uint8))


@dataclass(frozen=True)
class SweepCase:
    """One color of a sweep: the HUD content, the rendered scene, and its result."""

    color: tuple[int, int, int]
    hud: RgbImage
    measured: RgbImage
    result: InterferenceResult


def color_sweep(
    background: RgbImage,
    glyph_mask: RgbImage,
    region: Region,
    colors: list[tuple[int, int, int]],
    backend: SaliencyBackend,
    gain: float = 1.0,
) -> list[SweepCase]:
    """Evaluate the same glyph in several colors over one background.

    Every case shares the background, geometry, and gain, so the results are
    mutually comparable; an empty color list yields an empty result list.
    """
    out = []
    for color in colors:
        color = tuple(int(c) for c in color)
        hud = glyph_hud(glyph_mask, color)
        measured = composite(CompositeSpec(background, hud, region, gain))
        out.append(SweepCase(color, hud, measured, evaluate(measured, hud, region, backend)))
    return out
