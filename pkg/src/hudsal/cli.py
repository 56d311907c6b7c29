"""Command-line interface.

Subcommands: evaluate (one measured/HUD pair), batch (manifest-driven runs),
saliency (dump a saliency map alone), composite (blend a HUD into a frame),
sweep (recolor one glyph and rank the results).

Exit codes: 0 success, 2 argument or validation failure (before any saliency
work), 1 I/O or pipeline failure. Validation errors name the offending flag.
"""

from __future__ import annotations

import argparse
import os
import string
import sys
from functools import partial
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .compositor import MAX_GAIN, CompositeSpec, color_sweep, composite
from .errors import ValidationError
from .imagery import Region, RgbImage, load_png, save_gray_png, save_rgb_png
from .interference import PipelineRun, run_pipeline
from .reporting import (
    CaseReport,
    ManifestCase,
    load_manifest,
    params_fingerprint,
    write_csv_report,
    write_json_report,
    write_rankings_csv,
)
from .saliency import IttiParams, IttiSaliency, compute_saliency


def _parse_region_flag(text: str, flag: str = "--region") -> Region:
    parts = text.split(",")
    if len(parts) != 4:
        raise ValidationError(f"{flag}: expected four comma-separated integers X,Y,W,H, got {text!r}")
    try:
        x, y, w, h = (int(part) for part in parts)
    except ValueError as exc:
        raise ValidationError(f"{flag}: expected integers X,Y,W,H, got {text!r}") from exc
    if w < 1 or h < 1:
        raise ValidationError(f"{flag}: width and height must be positive, got width={w} height={h}")
    try:
        return Region(x, y, w, h)
    except ValidationError as exc:
        raise ValidationError(f"{flag}: {exc}") from exc


def _parse_color(token: str, flag: str = "--colors") -> tuple[int, int, int]:
    text = token.strip().lstrip("#")
    if len(text) != 6 or any(ch not in string.hexdigits for ch in text):
        raise ValidationError(f"{flag}: malformed hex color {token!r}, expected RRGGBB")
    value = int(text, 16)
    return (value >> 16) & 255, (value >> 8) & 255, value & 255


def _parse_colors_flag(text: str) -> list[tuple[int, int, int]]:
    colors = []
    for token in text.split(","):
        color = _parse_color(token)
        if color in colors:
            raise ValidationError(f"--colors: duplicate color {token.strip()!r}")
        colors.append(color)
    return colors


def _load_image_flag(path: str, flag: str) -> RgbImage:
    try:
        return load_png(path)
    except (ValidationError, OSError) as exc:
        raise ValidationError(f"{flag}: {exc}") from exc


def _check_min_side(img: RgbImage, params: IttiParams, flag: str) -> None:
    if min(img.width, img.height) < params.min_input_side:
        raise ValidationError(
            f"{flag}: image {img.width}x{img.height} is smaller than the "
            f"backend minimum side {params.min_input_side}"
        )


def _check_gain(gain: float) -> float:
    if not gain > 0.0:
        raise ValidationError(f"--gain: gain must be > 0, got {gain}")
    if gain > MAX_GAIN:
        raise ValidationError(f"--gain: gain must be <= {MAX_GAIN}, got {gain}")
    return gain


def _check_region_within(region: Region, img: RgbImage, flag: str = "--region") -> None:
    try:
        region.validate_within(img.width, img.height)
    except ValidationError as exc:
        raise ValidationError(f"{flag}: {exc}") from exc


def _resolve_jobs(flag_value: int | None) -> int:
    source = "--jobs"
    if flag_value is None and "HUDSAL_JOBS" in os.environ:
        source = "HUDSAL_JOBS"
        raw = os.environ["HUDSAL_JOBS"]
        try:
            flag_value = int(raw)
        except ValueError as exc:
            raise ValidationError(f"HUDSAL_JOBS: expected an integer, got {raw!r}") from exc
    if flag_value is None:
        return os.cpu_count() or 1
    if flag_value < 1:
        raise ValidationError(f"{source}: jobs must be >= 1, got {flag_value}")
    return flag_value


def _dump_run(run: PipelineRun, directory: Path, prefix: str = "") -> tuple[tuple[str, str], ...]:
    """Write the five intermediate maps as 8-bit grayscale PNGs."""
    maps = {
        "m_s": run.m_s,
        "m_s_hud": run.m_s_hud,
        "h_s": run.h_s,
        "e_plus": run.result.e_plus,
        "e_minus": run.result.e_minus,
    }
    artifacts = []
    for name, map_ in maps.items():
        filename = f"{name}.png"
        save_gray_png(map_, directory / filename)
        artifacts.append((name, prefix + filename))
    return tuple(artifacts)


def _write_reports(
    reports: list[CaseReport],
    out_dir: Path,
    fmt: str,
    extra: dict | None = None,
    rankings: bool = True,
) -> None:
    if fmt == "json":
        write_json_report(reports, out_dir / "report.json", extra)
    else:
        write_csv_report(reports, out_dir / "report.csv")
        if rankings:
            write_rankings_csv(reports, out_dir / "rankings.csv")


def cmd_evaluate(args) -> int:
    params = IttiParams()
    measured = _load_image_flag(args.measured, "--measured")
    hud = _load_image_flag(args.hud, "--hud")
    region = _parse_region_flag(args.region)
    _check_region_within(region, measured)
    _check_min_side(measured, params, "--measured")
    _check_min_side(hud, params, "--hud")

    run = run_pipeline(measured, hud, region, IttiSaliency(params))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts = _dump_run(run, out_dir) if args.dump_maps else ()
    report = CaseReport(
        id=Path(args.measured).stem,
        p=run.result.p,
        m=run.result.m,
        region=region,
        content_group="evaluate",
        params_fingerprint=params_fingerprint(params),
        artifacts=artifacts,
    )
    _write_reports([report], out_dir, args.format, rankings=False)
    print(f"p={run.result.p:.3f} m={run.result.m:.3f}")
    return 0


def _validate_case(case: ManifestCase, params: IttiParams) -> None:
    """Load and check one case's inputs without running any saliency work."""
    for label, path in (("measured", case.measured), ("hud", case.hud)):
        try:
            img = load_png(path)
        except (ValidationError, OSError) as exc:
            raise ValidationError(f"case {case.id}: {label}: {exc}") from exc
        if min(img.width, img.height) < params.min_input_side:
            raise ValidationError(
                f"case {case.id}: {label} image {img.width}x{img.height} is smaller "
                f"than the backend minimum side {params.min_input_side}"
            )
        if label == "measured":
            try:
                case.region.validate_within(img.width, img.height)
            except ValidationError as exc:
                raise ValidationError(f"case {case.id}: region: {exc}") from exc


def _run_case(case: ManifestCase, params: IttiParams, output_dir: Path, dump_maps: bool) -> CaseReport:
    run = run_pipeline(load_png(case.measured), load_png(case.hud), case.region, IttiSaliency(params))
    artifacts: tuple[tuple[str, str], ...] = ()
    if dump_maps:
        case_dir = output_dir / "maps" / case.id
        case_dir.mkdir(parents=True, exist_ok=True)
        artifacts = _dump_run(run, case_dir, prefix=f"maps/{case.id}/")
    return CaseReport(
        id=case.id,
        p=run.result.p,
        m=run.result.m,
        region=case.region,
        content_group=case.content_group,
        params_fingerprint=params_fingerprint(params),
        artifacts=artifacts,
    )


def cmd_batch(args) -> int:
    manifest = load_manifest(args.manifest)
    for case in manifest.cases:
        _validate_case(case, manifest.params)
    jobs = _resolve_jobs(args.jobs)
    if not manifest.cases:
        print("warning: manifest contains no cases", file=sys.stderr)

    manifest.output_dir.mkdir(parents=True, exist_ok=True)
    worker = partial(
        _run_case,
        params=manifest.params,
        output_dir=manifest.output_dir,
        dump_maps=manifest.dump_maps,
    )
    if jobs == 1 or len(manifest.cases) <= 1:
        reports = [worker(case) for case in manifest.cases]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(worker, manifest.cases))

    write_json_report(reports, manifest.output_dir / "report.json")
    write_csv_report(reports, manifest.output_dir / "report.csv")
    write_rankings_csv(reports, manifest.output_dir / "rankings.csv")
    for report in reports:
        print(f"{report.id}: p={report.p:.3f} m={report.m:.3f}")
    return 0


def cmd_saliency(args) -> int:
    params = IttiParams()
    image = _load_image_flag(args.image, "--image")
    _check_min_side(image, params, "--image")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_gray_png(compute_saliency(image, params), out)
    print(f"wrote {out}")
    return 0


def cmd_composite(args) -> int:
    background = _load_image_flag(args.background, "--background")
    hud = _load_image_flag(args.hud, "--hud")
    region = _parse_region_flag(args.region)
    gain = _check_gain(args.gain)
    _check_region_within(region, background)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_rgb_png(composite(CompositeSpec(background, hud, region, gain)), out)
    print(f"wrote {out}")
    return 0


def cmd_sweep(args) -> int:
    params = IttiParams()
    background = _load_image_flag(args.background, "--background")
    glyph = _load_image_flag(args.hud, "--hud")
    region = _parse_region_flag(args.region)
    gain = _check_gain(args.gain)
    colors = _parse_colors_flag(args.colors)
    _check_region_within(region, background)
    _check_min_side(background, params, "--background")
    _check_min_side(glyph, params, "--hud")
    channels = glyph.data
    if not (
        np.array_equal(channels[:, :, 0], channels[:, :, 1])
        and np.array_equal(channels[:, :, 1], channels[:, :, 2])
    ):
        raise ValidationError("--hud: sweep glyph must be achromatic (equal RGB channels)")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cases = color_sweep(background, glyph, region, colors, IttiSaliency(params), gain)
    fingerprint = params_fingerprint(params)
    reports = []
    for case in cases:
        name = "{:02X}{:02X}{:02X}".format(*case.color)
        save_rgb_png(case.measured, out_dir / f"composite_{name}.png")
        reports.append(
            CaseReport(
                id=name,
                p=case.result.p,
                m=case.result.m,
                region=region,
                content_group="sweep",
                params_fingerprint=fingerprint,
            )
        )
    _write_reports(reports, out_dir, args.format, extra={"gain": gain})
    if args.format == "json":
        write_rankings_csv(reports, out_dir / "rankings.csv")
    for report in reports:
        print(f"{report.id}: p={report.p:.3f} m={report.m:.3f}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hudsal",
        description="Quantify mutual visual interference between HUD content and a driving scene.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="evaluate one measured/HUD pair")
    ev.add_argument("--measured", required=True, help="measured scene PNG (HUD visible)")
    ev.add_argument("--hud", required=True, help="HUD content PNG on black")
    ev.add_argument("--region", required=True, metavar="X,Y,W,H", help="HUD placement region")
    ev.add_argument("--out", required=True, help="output directory")
    ev.add_argument("--dump-maps", action="store_true", help="also write the intermediate maps")
    ev.add_argument("--format", choices=("json", "csv"), default="json")
    ev.set_defaults(func=cmd_evaluate)

    ba = sub.add_parser("batch", help="run every case of a manifest")
    ba.add_argument("manifest", help="manifest JSON path")
    ba.add_argument("--jobs", type=int, default=None, help="parallel workers (default: processors; env HUDSAL_JOBS)")
    ba.set_defaults(func=cmd_batch)

    sa = sub.add_parser("saliency", help="compute and dump a saliency map alone")
    sa.add_argument("--image", required=True)
    sa.add_argument("--out", required=True, help="output PNG path")
    sa.set_defaults(func=cmd_saliency)

    co = sub.add_parser("composite", help="blend HUD content into a background frame")
    co.add_argument("--background", required=True)
    co.add_argument("--hud", required=True)
    co.add_argument("--region", required=True, metavar="X,Y,W,H")
    co.add_argument("--out", required=True, help="output PNG path")
    co.add_argument("--gain", type=float, default=1.0)
    co.set_defaults(func=cmd_composite)

    sw = sub.add_parser("sweep", help="recolor one glyph, evaluate each color, rank by m")
    sw.add_argument("--background", required=True)
    sw.add_argument("--hud", required=True, help="achromatic glyph mask PNG")
    sw.add_argument("--region", required=True, metavar="X,Y,W,H")
    sw.add_argument("--colors", required=True, help="comma-separated hex colors, e.g. FFFFFF,FF0000")
    sw.add_argument("--out", required=True, help="output directory")
    sw.add_argument("--gain", type=float, default=1.0)
    sw.add_argument("--format", choices=("json", "csv"), default="json")
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - I/O or pipeline failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())
