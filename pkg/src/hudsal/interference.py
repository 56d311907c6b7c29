"""Difference-saliency evaluation of the HUD region.

The measured scene's saliency map is cropped to the HUD region and compared
against the saliency of the HUD content alone. The signed difference splits
into two nonnegative parts with disjoint support: the positive part is
background saliency leaking into the display scope (visual distraction), the
negative part is HUD-content saliency lost against the background (saliency
reduction). Each part, summed and normalized by region area times 255, gives
a scalar index in [0, 1]:

    p = sum(max(E, 0)) / (N * M * 255)
    m = sum(-min(E, 0)) / (N * M * 255)

Index sums use exact (compensated) summation, so the [0, 1] bounds and
permutation invariance hold exactly, not just to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .imagery import GrayMap, Region, RgbImage, crop, resize_bilinear
from .saliency import SaliencyBackend


@dataclass(frozen=True)
class SignedMap:
    """Signed per-pixel difference raster, values within [-255, 255]."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"signed map must be 2-D and nonempty, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValidationError("signed map values must be finite")
        if np.abs(arr).max() > 255.0:
            raise ValidationError("signed map values must lie within [-255, 255]")
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
class InterferenceResult:
    """Difference map, its split, and the two scalar indices.

    Construction enforces the mutual-consistency invariants: the split parts
    recombine to the difference map exactly, their supports are disjoint, and
    both indices lie in [0, 1].
    """

    e: SignedMap
    e_plus: GrayMap
    e_minus: GrayMap
    p: float
    m: float

    def __post_init__(self) -> None:
        if not (self.e.data.shape == self.e_plus.data.shape == self.e_minus.data.shape):
            raise ValidationError("difference map and split parts must share dimensions")
        if not np.array_equal(self.e_plus.data - self.e_minus.data, self.e.data):
            raise ValidationError("split parts must recombine to the difference map exactly")
        if np.any(self.e_plus.data * self.e_minus.data != 0.0):
            raise ValidationError("split parts must have disjoint support")
        for name, value in (("p", self.p), ("m", self.m)):
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"index {name} must lie in [0, 1], got {value}")


def difference(m_s_hud: GrayMap, h_s: GrayMap) -> SignedMap:
    """Pointwise difference of the cropped scene saliency and the HUD saliency.

    Both maps must already share dimensions (resizing is the pipeline's job)
    and be bounded by [0, 255]. No clamping is applied.
    """
    if m_s_hud.data.shape != h_s.data.shape:
        raise ValidationError(
            f"map dimensions differ: {m_s_hud.width}x{m_s_hud.height} vs {h_s.width}x{h_s.height}"
        )
    for name, m in (("scene", m_s_hud), ("HUD", h_s)):
        if m.data.min() < 0.0 or m.data.max() > 255.0:
            raise ValidationError(f"{name} saliency values must lie in [0, 255]")
    return SignedMap(m_s_hud.data - h_s.data)


def split(e: SignedMap) -> tuple[GrayMap, GrayMap]:
    """Nonnegative positive and negative parts: (max(E, 0), -min(E, 0))."""
    return GrayMap(np.maximum(e.data, 0.0)), GrayMap(np.abs(np.minimum(e.data, 0.0)))


def indices(e_plus: GrayMap, e_minus: GrayMap) -> tuple[float, float]:
    """Scalar distraction and reduction indices, each in [0, 1]."""
    if e_plus.data.shape != e_minus.data.shape:
        raise ValidationError("split parts must share dimensions")
    for name, m in (("e_plus", e_plus), ("e_minus", e_minus)):
        if m.data.min() < 0.0 or m.data.max() > 255.0:
            raise ValidationError(f"{name} values must lie in [0, 255]")
    denom = e_plus.height * e_plus.width * 255.0
    p = math.fsum(e_plus.data.ravel()) / denom
    m = math.fsum(e_minus.data.ravel()) / denom
    return p, m


def _check_backend_output(out: GrayMap, src: RgbImage) -> None:
    if (out.height, out.width) != (src.height, src.width):
        raise ValidationError(
            f"backend output {out.width}x{out.height} does not match input {src.width}x{src.height}"
        )
    if out.data.min() < 0.0 or out.data.max() > 255.0:
        raise ValidationError("backend output values must lie in [0, 255]")


@dataclass(frozen=True)
class PipelineRun:
    """One evaluation with its intermediate maps kept for inspection or dumping."""

    m_s: GrayMap
    m_s_hud: GrayMap
    h_s: GrayMap
    result: InterferenceResult


def run_pipeline(
    measured: RgbImage,
    hud: RgbImage,
    region: Region,
    backend: SaliencyBackend,
) -> PipelineRun:
    """Full difference-saliency pipeline, returning intermediates as well.

    The HUD saliency is computed at the HUD image's native resolution and the
    resulting map (not the image) is resized to the region's dimensions; this
    order is deliberate, because resizing the image first would change the
    filter responses.
    """
    region.validate_within(measured.width, measured.height)
    m_s = backend.compute(measured)
    _check_backend_output(m_s, measured)
    m_s_hud = crop(m_s, region)
    h_s_native = backend.compute(hud)
    _check_backend_output(h_s_native, hud)
    h_s = resize_bilinear(h_s_native, region.w, region.h)
    e = difference(m_s_hud, h_s)
    e_plus, e_minus = split(e)
    p, m = indices(e_plus, e_minus)
    return PipelineRun(m_s, m_s_hud, h_s, InterferenceResult(e, e_plus, e_minus, p, m))


def evaluate(
    measured: RgbImage,
    hud: RgbImage,
    region: Region,
    backend: SaliencyBackend,
) -> InterferenceResult:
    """Evaluate the mutual interference for one measured/HUD pair."""
    return run_pipeline(measured, hud, region, backend).result
