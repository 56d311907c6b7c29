"""Bottom-up saliency: intensity, color, and orientation conspicuity combined.

This is the classic center-surround / across-scale architecture: a 9-level
low-pass pyramid, feature maps as absolute differences between a fine
"center" level and an upsampled coarse "surround" level, a peak-competition
normalization operator, and summation into one master map. Motion plays no
part; one frame in, one map out, with no state between calls.

Backends are pluggable: anything with ``compute(image) -> GrayMap`` whose
output matches the input dimensions and stays within [0, 255] can drive the
interference evaluation. :class:`IttiSaliency` is the default backend.

Numeric pinning worth knowing about:

* the pyramid low-pass is the separable 5-tap binomial (1, 4, 6, 4, 1)/16,
  whose taps are exact binary fractions, so constant inputs propagate through
  every level without rounding;
* Gabor taps are quantized to multiples of 2**-24 and re-balanced to an
  exactly zero sum, so a constant region produces an exactly zero response;
* together with the exact-constant bilinear resampler this makes the
  zero-contrast => zero-saliency guarantee hold bit-exactly, not just
  approximately.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Protocol

import numpy as np
from scipy import ndimage

from .errors import ValidationError
from .imagery import GrayMap, RgbImage, resample_bilinear, to_intensity

_BINOMIAL5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
_NEIGHBORS8 = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]], dtype=bool)
_TAP_QUANTUM = float(1 << 24)


class SaliencyBackend(Protocol):
    """Contract every saliency model must honor to plug into the evaluation."""

    def compute(self, image: RgbImage) -> GrayMap:
        """Return a map with the input's dimensions and values in [0, 255]."""
        ...


def _as_sorted_unique(values: Iterable[int], name: str) -> tuple[int, ...]:
    out = tuple(sorted({int(v) for v in values}))
    if not out:
        raise ValidationError(f"{name} must not be empty")
    if any(v < 0 for v in out):
        raise ValidationError(f"{name} must be nonnegative, got {out}")
    return out


@dataclass(frozen=True)
class IttiParams:
    """Scale and filter configuration for the default backend.

    Defaults follow the canonical setup: 9 pyramid levels, centers at levels
    2-4, surrounds 3 or 4 levels coarser, conspicuity summed at level 4, and
    four even-symmetric Gabor orientations.
    """

    pyramid_levels: int = 9
    center_scales: tuple[int, ...] = (2, 3, 4)
    deltas: tuple[int, ...] = (3, 4)
    orientations: tuple[float, ...] = (0.0, 45.0, 90.0, 135.0)
    output_scale: int = 4
    gabor_wavelength: float = 7.0
    gabor_sigma: float = 2.8
    gabor_aspect: float = 1.0
    gabor_radius: int = 8

    def __post_init__(self) -> None:
        if self.pyramid_levels < 1:
            raise ValidationError(f"pyramid_levels must be >= 1, got {self.pyramid_levels}")
        object.__setattr__(self, "center_scales", _as_sorted_unique(self.center_scales, "center_scales"))
        object.__setattr__(self, "deltas", _as_sorted_unique(self.deltas, "deltas"))
        orientations = tuple(float(t) for t in self.orientations)
        if not orientations:
            raise ValidationError("orientations must not be empty")
        object.__setattr__(self, "orientations", orientations)
        if any(d < 1 for d in self.deltas):
            raise ValidationError(f"deltas must be >= 1, got {self.deltas}")
        deepest = max(self.center_scales) + max(self.deltas)
        if deepest > self.pyramid_levels - 1:
            raise ValidationError(
                f"max center scale + max delta = {deepest} needs more than "
                f"{self.pyramid_levels} pyramid levels"
            )
        allowed = set(self.center_scales) | {min(self.center_scales)}
        if self.output_scale not in allowed:
            raise ValidationError(
                f"output_scale {self.output_scale} must be one of the center scales {sorted(allowed)}"
            )
        if self.gabor_wavelength <= 0 or self.gabor_sigma <= 0 or self.gabor_aspect <= 0:
            raise ValidationError("gabor wavelength, sigma, and aspect must be positive")
        if self.gabor_radius < 1:
            raise ValidationError(f"gabor_radius must be >= 1, got {self.gabor_radius}")

    @property
    def min_input_side(self) -> int:
        """Smallest accepted image side; smaller inputs are rejected, not padded."""
        return 1 << (max(self.center_scales) + max(self.deltas))

    def as_dict(self) -> dict:
        return {
            "pyramid_levels": self.pyramid_levels,
            "center_scales": list(self.center_scales),
            "deltas": list(self.deltas),
            "orientations": list(self.orientations),
            "output_scale": self.output_scale,
            "gabor_wavelength": self.gabor_wavelength,
            "gabor_sigma": self.gabor_sigma,
            "gabor_aspect": self.gabor_aspect,
            "gabor_radius": self.gabor_radius,
        }


@dataclass(frozen=True)
class Pyramid:
    """Low-pass pyramid; level k+1 has ceil(level k / 2) dimensions."""

    levels: tuple[GrayMap, ...]

    def __post_init__(self) -> None:
        if not self.levels:
            raise ValidationError("pyramid must have at least one level")
        object.__setattr__(self, "levels", tuple(self.levels))
        for k in range(1, len(self.levels)):
            prev = self.levels[k - 1]
            cur = self.levels[k]
            want = (-(-prev.height // 2), -(-prev.width // 2))
            if (cur.height, cur.width) != want:
                raise ValidationError(
                    f"pyramid level {k} has dimensions {cur.width}x{cur.height}, "
                    f"expected {want[1]}x{want[0]}"
                )

    def shapes(self) -> list[tuple[int, int]]:
        return [(lvl.height, lvl.width) for lvl in self.levels]


def _reduce_once(arr: np.ndarray) -> np.ndarray:
    # 5x5 binomial low-pass (edge-clamped), then keep even rows/columns
    smoothed = ndimage.convolve1d(arr, _BINOMIAL5, axis=0, mode="nearest")
    smoothed = ndimage.convolve1d(smoothed, _BINOMIAL5, axis=1, mode="nearest")
    return smoothed[::2, ::2]


def build_pyramid(map_: GrayMap, levels: int) -> Pyramid:
    """Build a low-pass pyramid with the requested number of levels.

    Requires both input sides to be at least 2**(levels - 1) so no level
    degenerates; rejects smaller inputs with the minimum named.
    """
    if levels < 1:
        raise ValidationError(f"levels must be >= 1, got {levels}")
    min_side = 1 << (levels - 1)
    if map_.width < min_side or map_.height < min_side:
        raise ValidationError(
            f"{map_.width}x{map_.height} input too small for {levels} pyramid levels; "
            f"needs at least {min_side}x{min_side}"
        )
    out = [map_]
    arr = map_.data
    for _ in range(levels - 1):
        arr = _reduce_once(arr)
        out.append(GrayMap(arr))
    return Pyramid(tuple(out))


def _upsample_chain(arr: np.ndarray, shapes: list[tuple[int, int]], src: int, dst: int) -> np.ndarray:
    # repeated bilinear doubling through every intermediate level's dimensions
    for k in range(src - 1, dst - 1, -1):
        h, w = shapes[k]
        arr = resample_bilinear(arr, w, h)
    return arr


def center_surround(pyr: Pyramid, c: int, s: int) -> GrayMap:
    """Absolute center-surround difference between two pyramid levels.

    The surround level is brought up to the center level's dimensions by
    repeated bilinear doubling; the result is |center - surround| at the
    center level's dimensions.
    """
    n = len(pyr.levels)
    if not (0 <= c < n and 0 <= s < n):
        raise ValidationError(f"levels ({c}, {s}) out of range for a {n}-level pyramid")
    if c >= s:
        raise ValidationError(f"center level must be finer than surround, got c={c}, s={s}")
    surround = _upsample_chain(pyr.levels[s].data, pyr.shapes(), s, c)
    return GrayMap(np.abs(pyr.levels[c].data - surround))


def color_opponents(img: RgbImage) -> tuple[GrayMap, GrayMap, GrayMap, GrayMap]:
    """Broadly tuned red, green, blue, and yellow channels.

    r, g, b are first divided by the local intensity wherever it exceeds a
    tenth of the image's peak intensity (strict comparison; hue is meaningless
    in near-black pixels) and zeroed elsewhere, then combined into the four
    opponent channels, each clamped below at zero.
    """
    d = img.data.astype(np.float64)
    r, g, b = d[:, :, 0], d[:, :, 1], d[:, :, 2]
    intensity = (r + g + b) / 3.0
    lit = intensity > intensity.max() / 10.0
    rn = np.zeros_like(intensity)
    gn = np.zeros_like(intensity)
    bn = np.zeros_like(intensity)
    np.divide(r, intensity, out=rn, where=lit)
    np.divide(g, intensity, out=gn, where=lit)
    np.divide(b, intensity, out=bn, where=lit)
    red = rn - (gn + bn) / 2.0
    green = gn - (rn + bn) / 2.0
    blue = bn - (rn + gn) / 2.0
    yellow = (rn + gn) / 2.0 - np.abs(rn - gn) / 2.0 - bn
    return tuple(GrayMap(np.maximum(ch, 0.0)) for ch in (red, green, blue, yellow))


def gabor_kernel(theta_deg: float, params: IttiParams) -> np.ndarray:
    """Even-symmetric Gabor kernel preferring bars oriented at ``theta_deg``.

    The kernel is zero-meaned, L2-normalized (so orientations respond with
    equal energy), and its taps are quantized to multiples of 2**-24 with the
    residual folded into the center tap: the tap sum is exactly zero, which
    makes the response to any constant 8-bit region vanish identically.
    """
    theta = np.deg2rad(theta_deg)
    radius = params.gabor_radius
    y, x = np.mgrid[-radius : radius + 1, -radius : radius + 1].astype(np.float64)
    along = x * np.cos(theta) + y * np.sin(theta)
    across = -x * np.sin(theta) + y * np.cos(theta)
    envelope = np.exp(-(along**2 + (params.gabor_aspect * across) ** 2) / (2.0 * params.gabor_sigma**2))
    kernel = envelope * np.cos(2.0 * np.pi * across / params.gabor_wavelength)
    kernel -= kernel.mean()
    kernel /= np.sqrt(np.sum(kernel * kernel))
    kernel = np.round(kernel * _TAP_QUANTUM) / _TAP_QUANTUM
    kernel[radius, radius] -= kernel.sum()
    return kernel


def orientation_maps(
    intensity_pyr: Pyramid,
    params: IttiParams,
    levels: Iterable[int] | None = None,
) -> dict[tuple[int, float], GrayMap]:
    """Rectified Gabor responses, keyed by (pyramid level, orientation in degrees).

    Filters every level by default; pass ``levels`` to restrict the work to
    the scales a caller actually consumes.
    """
    wanted = range(len(intensity_pyr.levels)) if levels is None else sorted(set(levels))
    kernels = {theta: gabor_kernel(theta, params) for theta in params.orientations}
    out: dict[tuple[int, float], GrayMap] = {}
    for k in wanted:
        if not (0 <= k < len(intensity_pyr.levels)):
            raise ValidationError(f"pyramid level {k} out of range")
        arr = intensity_pyr.levels[k].data
        for theta, kernel in kernels.items():
            response = ndimage.convolve(arr, kernel, mode="nearest")
            out[(k, theta)] = GrayMap(np.maximum(response, 0.0))
    return out


def normalize_map(map_: GrayMap) -> GrayMap:
    """Peak-competition normalization.

    Rescales the map linearly onto [0, 255] (a constant map, including the
    all-zero map, collapses to zeros), then multiplies by
    ((255 - mean_other_local_maxima) / 255)**2, where the local maxima are
    strict 3x3 peaks excluding the global maximum. Plateau ties are broken
    row-major: the first occurrence of the maximum counts as "the" global
    maximum, any equal peak elsewhere counts as a local maximum.
    """
    arr = map_.data
    lo = arr.min()
    hi = arr.max()
    if hi == lo:
        return GrayMap(arr - lo)
    scaled = (arr - lo) * (255.0 / (hi - lo))
    neighbor_max = ndimage.maximum_filter(scaled, footprint=_NEIGHBORS8, mode="constant", cval=-np.inf)
    peaks = scaled > neighbor_max
    peaks[np.unravel_index(np.argmax(scaled), scaled.shape)] = False
    others = scaled[peaks]
    mean_other = float(others.mean()) if others.size else 0.0
    return GrayMap(scaled * ((255.0 - mean_other) / 255.0) ** 2)


def _scale_pairs(params: IttiParams) -> list[tuple[int, int]]:
    return [(c, c + d) for c in params.center_scales for d in params.deltas]


def _accumulate(maps: Iterable[GrayMap], out_h: int, out_w: int) -> np.ndarray:
    # normalize each feature map, bring it to the output scale, sum pointwise
    total = np.zeros((out_h, out_w))
    for m in maps:
        total += resample_bilinear(normalize_map(m).data, out_w, out_h)
    return total


def _check_input_size(img: RgbImage, params: IttiParams) -> None:
    min_side = params.min_input_side
    if img.width < min_side or img.height < min_side:
        raise ValidationError(
            f"{img.width}x{img.height} input below the {min_side}x{min_side} minimum "
            f"for these scales; inputs are rejected rather than padded"
        )


def conspicuity_maps(img: RgbImage, params: IttiParams | None = None) -> tuple[GrayMap, GrayMap, GrayMap]:
    """Intensity, color, and orientation conspicuity maps at the output scale.

    Feature maps: 6 intensity center-surround maps; 12 color maps using the
    double-opponency differences |(R(c)-G(c)) - (G(s)-R(s))| and
    |(B(c)-Y(c)) - (Y(s)-B(s))| with the surround term upsampled to the
    center scale; 24 orientation maps. Each is normalized and resampled to
    the output scale; orientation maps are summed per orientation, each group
    normalized again, then the groups are summed.
    """
    params = params if params is not None else IttiParams()
    _check_input_size(img, params)
    pairs = _scale_pairs(params)

    intensity_pyr = build_pyramid(to_intensity(img), params.pyramid_levels)
    shapes = intensity_pyr.shapes()
    out_h, out_w = shapes[params.output_scale]

    i_bar = _accumulate((center_surround(intensity_pyr, c, s) for c, s in pairs), out_h, out_w)

    red, green, blue, yellow = color_opponents(img)
    rp, gp, bp, yp = (build_pyramid(ch, params.pyramid_levels) for ch in (red, green, blue, yellow))
    color_maps = []
    for c, s in pairs:
        rg_center = rp.levels[c].data - gp.levels[c].data
        rg_surround = gp.levels[s].data - rp.levels[s].data
        color_maps.append(GrayMap(np.abs(rg_center - _upsample_chain(rg_surround, shapes, s, c))))
        by_center = bp.levels[c].data - yp.levels[c].data
        by_surround = yp.levels[s].data - bp.levels[s].data
        color_maps.append(GrayMap(np.abs(by_center - _upsample_chain(by_surround, shapes, s, c))))
    c_bar = _accumulate(color_maps, out_h, out_w)

    used_levels = sorted({c for c, _ in pairs} | {s for _, s in pairs})
    gabor = orientation_maps(intensity_pyr, params, levels=used_levels)
    o_bar = np.zeros((out_h, out_w))
    for theta in params.orientations:
        group = [
            GrayMap(np.abs(gabor[(c, theta)].data - _upsample_chain(gabor[(s, theta)].data, shapes, s, c)))
            for c, s in pairs
        ]
        o_bar += normalize_map(GrayMap(_accumulate(group, out_h, out_w))).data

    return GrayMap(i_bar), GrayMap(c_bar), GrayMap(o_bar)


def compute_saliency(img: RgbImage, params: IttiParams | None = None) -> GrayMap:
    """Full saliency map at the input's dimensions, values in [0, 255].

    The three conspicuity maps are normalized, averaged, upsampled bilinearly
    to the input dimensions, and linearly rescaled so the global maximum is
    255 (a zero map stays zero). Deterministic: identical input and
    parameters give bit-identical output.
    """
    params = params if params is not None else IttiParams()
    i_bar, c_bar, o_bar = conspicuity_maps(img, params)
    combined = (normalize_map(i_bar).data + normalize_map(c_bar).data + normalize_map(o_bar).data) / 3.0
    full = resample_bilinear(combined, img.width, img.height)
    peak = full.max()
    if peak > 0.0:
        full = np.minimum(full * (255.0 / peak), 255.0)
    return GrayMap(full)


@dataclass
class IttiSaliency:
    """Default saliency backend; satisfies the :class:`SaliencyBackend` contract."""

    params: IttiParams = field(default_factory=IttiParams)

    def compute(self, image: RgbImage) -> GrayMap:
        return compute_saliency(image, self.params)

    def get_params(self) -> dict:
        """Effective configuration, e.g. for report fingerprinting."""
        return self.params.as_dict()
