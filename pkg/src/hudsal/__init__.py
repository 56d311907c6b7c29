"""Mutual visual interference between HUD content and the scene behind it.

A bottom-up saliency backend turns the measured scene and the HUD content
into saliency maps; the signed difference over the HUD region reduces to two
indices, p (how much the HUD pulls attention away from the scene) and m (how
much the scene washes out the HUD's own saliency).
"""

from .compositor import MAX_GAIN, CompositeSpec, SweepCase, color_sweep, composite, glyph_hud
from .errors import ValidationError
from .imagery import (
    GrayMap,
    Region,
    RgbImage,
    crop,
    load_png,
    resize_bilinear,
    save_gray_png,
    save_rgb_png,
    to_intensity,
)
from .interference import (
    InterferenceResult,
    PipelineRun,
    SignedMap,
    difference,
    evaluate,
    indices,
    run_pipeline,
    split,
)
from .reporting import (
    CaseManifest,
    CaseReport,
    ManifestCase,
    load_manifest,
    params_fingerprint,
    rank_by_reduction,
)
from .saliency import (
    IttiParams,
    IttiSaliency,
    SaliencyBackend,
    build_pyramid,
    compute_saliency,
    conspicuity_maps,
    normalize_map,
)

__version__ = "0.1.0"
