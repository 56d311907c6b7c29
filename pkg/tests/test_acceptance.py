"""End-to-end acceptance checks.

Each test covers one acceptance criterion and prints a single PASS or FAIL
line straight to the terminal (bypassing capture), so a full run reads as a
checklist. Numeric tolerances are stated inline next to each assertion.
"""

import contextlib
import hashlib
import json
import math
import time

import conftest
import numpy as np

from hudsal import (
    GrayMap,
    IttiSaliency,
    Region,
    RgbImage,
    CompositeSpec,
    color_sweep,
    composite,
    compute_saliency,
    difference,
    indices,
    run_pipeline,
    save_rgb_png,
    split,
)
from hudsal.cli import main as cli_main

from oracles import index_pair
from synth import (
    HUD_REGION,
    SMALL_PARAMS,
    SWEEP_COLORS,
    bar_glyph,
    cluttered_disk_scene,
    high_clutter_scene,
    low_clutter_scene,
    solid,
    tiled_scene,
)


@contextlib.contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException:
        _record(f"[FAIL] criterion {number}: {title}")
        raise
    _record(f"[PASS] criterion {number}: {title}")


def _record(line):
    print(line, flush=True)
    conftest.criterion_lines.append(line)


def test_criterion_1_equation_oracle_suite(rng):
    with criterion(1, "index equations agree with a scalar-loop oracle on 1000 random pairs"):
        start = time.monotonic()
        for _ in range(1000):
            h, w = (int(v) for v in rng.integers(1, 17, 2))
            a = rng.uniform(0.0, 255.0, (h, w))
            b = rng.uniform(0.0, 255.0, (h, w))
            e = difference(GrayMap(a), GrayMap(b))
            p, m = indices(*split(e))
            ref_p, ref_m, ref_sum = index_pair(a, b)
            assert abs(p - ref_p) <= 1e-12
            assert abs(m - ref_m) <= 1e-12
            # decomposition identity: sum(E) = (p - m) * N * M * 255
            total = math.fsum(e.data.ravel())
            assert abs(total - (p - m) * h * w * 255.0) <= 1e-9 * max(1.0, abs(total))
            assert abs(total - ref_sum) <= 1e-9 * max(1.0, abs(ref_sum))
        assert time.monotonic() - start < 5.0


def test_criterion_2_bounds_and_signs(rng):
    with criterion(2, "indices bounded in [0, 1], split supports disjoint, self-difference zero"):
        for _ in range(100):
            h, w = (int(v) for v in rng.integers(1, 25, 2))
            a = rng.uniform(0.0, 255.0, (h, w))
            b = rng.uniform(0.0, 255.0, (h, w))
            e = difference(GrayMap(a), GrayMap(b))
            e_plus, e_minus = split(e)
            assert not np.any(e_plus.data * e_minus.data)
            p, m = indices(e_plus, e_minus)
            assert 0.0 <= p <= 1.0
            assert 0.0 <= m <= 1.0
        for _ in range(10):
            a = rng.uniform(0.0, 255.0, (12, 12))
            p, m = indices(*split(difference(GrayMap(a), GrayMap(a))))
            assert p == 0.0
            assert m == 0.0


def test_criterion_3_nullity_and_pop_out():
    with criterion(3, "all-black frame scores exactly zero; lone square wins the argmax"):
        start = time.monotonic()
        flat = compute_saliency(solid(256, 256, (0, 0, 0)))
        assert not flat.data.any()

        arr = np.zeros((256, 256, 3), dtype=np.uint8)
        arr[120:136, 120:136] = 255
        out = compute_saliency(RgbImage(arr))
        r, c = np.unravel_index(np.argmax(out.data), out.data.shape)
        assert 104 <= r < 152  # footprint dilated by 2**4
        assert 104 <= c < 152
        assert time.monotonic() - start < 10.0


def test_criterion_4_red_on_red_reduction_ordering():
    with criterion(4, "red glyph loses most saliency against a red disk at three disk sizes"):
        start = time.monotonic()
        backend = IttiSaliency()
        glyph = bar_glyph(256)
        # disk radii put the disk at ~25/40/60% of the 256x256 HUD region
        for radius in (73, 92, 112):
            scene = cluttered_disk_scene(radius)
            cases = color_sweep(
                scene, glyph, HUD_REGION, list(SWEEP_COLORS.values()), backend
            )
            m_of = dict(zip(SWEEP_COLORS, (case.result.m for case in cases)))
            for name in ("white", "green", "blue"):
                assert m_of["red"] > m_of[name], (radius, m_of)
        assert time.monotonic() - start < 60.0


def test_criterion_5_clutter_distraction_ordering():
    with criterion(5, "busier background distracts more for every glyph color"):
        backend = IttiSaliency()
        glyph = bar_glyph(256)
        colors = list(SWEEP_COLORS.values())
        high = color_sweep(high_clutter_scene(), glyph, HUD_REGION, colors, backend)
        low = color_sweep(low_clutter_scene(), glyph, HUD_REGION, colors, backend)
        for name, case_high, case_low in zip(SWEEP_COLORS, high, low):
            assert case_high.result.p > case_low.result.p, name


def test_criterion_6_compositor_identity_and_locality(rng):
    with criterion(6, "black HUD is a no-op and blending never leaks outside the region"):
        bg = tiled_scene(128, seed=5)
        region = Region(32, 32, 64, 64)
        untouched = composite(CompositeSpec(bg, solid(64, 64, (0, 0, 0)), region))
        assert np.array_equal(untouched.data, bg.data)

        noise = RgbImage(rng.integers(0, 256, (64, 64, 3), dtype=np.uint8))
        blended = composite(CompositeSpec(bg, noise, region, gain=2.0))
        outside = np.ones((128, 128), dtype=bool)
        outside[32:96, 32:96] = False
        assert np.array_equal(blended.data[outside], bg.data[outside])


def _batch_fixture(tmp_path):
    glyph = bar_glyph(64, rows=(24, 40), cols=(16, 48))
    save_rgb_png(glyph, tmp_path / "glyph.png")
    cases = []
    for i in range(8):
        name = f"scene_{i}.png"
        save_rgb_png(tiled_scene(96, seed=300 + i), tmp_path / name)
        cases.append(
            {
                "id": f"case-{i}",
                "measured": name,
                "hud": "glyph.png",
                "region": {"x": 16, "y": 16, "w": 64, "h": 64},
                "content_group": "icons" if i < 4 else "text",
            }
        )
    manifest = {
        "schema_version": 1,
        "output_dir": "out",
        "dump_maps": True,
        "params": {
            "pyramid_levels": SMALL_PARAMS.pyramid_levels,
            "center_scales": list(SMALL_PARAMS.center_scales),
            "deltas": list(SMALL_PARAMS.deltas),
            "output_scale": SMALL_PARAMS.output_scale,
        },
        "cases": cases,
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest), encoding="utf-8")
    return path


def test_criterion_7_batch_determinism(tmp_path, capsys):
    with criterion(7, "consecutive batch runs emit bit-identical reports and maps"):
        manifest = _batch_fixture(tmp_path)
        out = tmp_path / "out"

        def run_and_hash():
            assert cli_main(["batch", str(manifest), "--jobs", "2"]) == 0
            return {
                str(f.relative_to(out)): hashlib.sha256(f.read_bytes()).hexdigest()
                for f in sorted(out.rglob("*"))
                if f.is_file()
            }

        first = run_and_hash()
        second = run_and_hash()
        capsys.readouterr()
        assert first == second
        # 3 report files plus five dumped maps for each of the 8 cases
        assert len(first) == 3 + 8 * 5


def test_criterion_8_blank_hud_special_case():
    with criterion(8, "blank HUD collapses to m = 0 and p = mean of the cropped scene map"):
        run = run_pipeline(
            high_clutter_scene(),
            solid(256, 256, (0, 0, 0)),
            HUD_REGION,
            IttiSaliency(),
        )
        assert not run.h_s.data.any()
        assert run.result.m == 0.0
        expected_p = float(np.mean(run.m_s_hud.data)) / 255.0
        assert abs(run.result.p - expected_p) <= 1e-12
