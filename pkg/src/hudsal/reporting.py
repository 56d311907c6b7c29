"""Batch manifests, case reports, and report serialization.

A manifest is a JSON document binding measured image, HUD image, and region
per evaluation case; it is validated in full before any evaluation starts.
Reports carry both full-precision indices and 3-decimal display strings, and
a fingerprint of the effective backend parameters so runs are attributable.
Rankings are computed strictly within one content group: cases with different
content are not comparable and any attempt to rank across groups is refused.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError
from .imagery import Region
from .saliency import IttiParams

MANIFEST_SCHEMA_VERSION = 1

REPORT_CSV_HEADER = ["id", "p", "m", "region", "content_group"]


def params_fingerprint(params: IttiParams) -> str:
    """Stable hash of the effective backend parameters."""
    canonical = json.dumps(params.as_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ManifestCase:
    id: str
    measured: Path
    hud: Path
    region: Region
    content_group: str


@dataclass(frozen=True)
class CaseManifest:
    cases: tuple[ManifestCase, ...]
    output_dir: Path
    dump_maps: bool = False
    params: IttiParams = field(default_factory=IttiParams)


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ValidationError(f"{where}: missing required key {key!r}")
    return obj[key]


def _parse_region_obj(obj, where: str) -> Region:
    if not isinstance(obj, dict) or set(obj) != {"x", "y", "w", "h"}:
        raise ValidationError(f"{where}: region must be an object with keys x, y, w, h")
    values = {}
    for key in ("x", "y", "w", "h"):
        v = obj[key]
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise ValidationError(f"{where}: region {key} must be a nonnegative integer, got {v!r}")
        values[key] = v
    return Region(**values)


def parse_params(overrides: dict, where: str = "params") -> IttiParams:
    """Build backend parameters from a manifest override block."""
    if not isinstance(overrides, dict):
        raise ValidationError(f"{where}: must be an object")
    defaults = IttiParams()
    known = set(defaults.as_dict())
    unknown = set(overrides) - known
    if unknown:
        raise ValidationError(f"{where}: unknown parameter(s) {sorted(unknown)}")
    merged = defaults.as_dict()
    merged.update(overrides)
    merged["center_scales"] = tuple(merged["center_scales"])
    merged["deltas"] = tuple(merged["deltas"])
    merged["orientations"] = tuple(merged["orientations"])
    return IttiParams(**merged)


def load_manifest(path: str | os.PathLike) -> CaseManifest:
    """Parse and fully validate a manifest file.

    Relative paths are resolved against the manifest's directory. Any invalid
    case fails the whole manifest before a single evaluation runs.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: manifest must be a JSON object")
    version = _require(doc, "schema_version", str(path))
    if version != MANIFEST_SCHEMA_VERSION:
        raise ValidationError(
            f"{path}: unsupported schema_version {version!r}, expected {MANIFEST_SCHEMA_VERSION}"
        )
    base = path.parent
    output_dir = base / str(_require(doc, "output_dir", str(path)))
    dump_maps = doc.get("dump_maps", False)
    if not isinstance(dump_maps, bool):
        raise ValidationError(f"{path}: dump_maps must be a boolean")
    params = parse_params(doc.get("params", {}), where=f"{path}: params")

    raw_cases = _require(doc, "cases", str(path))
    if not isinstance(raw_cases, list):
        raise ValidationError(f"{path}: cases must be a list")
    cases = []
    seen_ids: set[str] = set()
    for idx, raw in enumerate(raw_cases):
        where = f"{path}: cases[{idx}]"
        if not isinstance(raw, dict):
            raise ValidationError(f"{where}: must be an object")
        case_id = _require(raw, "id", where)
        if not isinstance(case_id, str) or not case_id:
            raise ValidationError(f"{where}: id must be a nonempty string")
        if not re.fullmatch(r"[A-Za-z0-9][A-Za-z0-9._-]*", case_id):
            raise ValidationError(
                f"{where}: id {case_id!r} must be filesystem-safe "
                f"(letters, digits, '.', '_', '-')"
            )
        if case_id in seen_ids:
            raise ValidationError(f"{where}: duplicate case id {case_id!r}")
        seen_ids.add(case_id)
        group = _require(raw, "content_group", where)
        if not isinstance(group, str) or not group:
            raise ValidationError(f"{where}: content_group must be a nonempty string")
        region = _parse_region_obj(_require(raw, "region", where), where)
        paths = {}
        for key in ("measured", "hud"):
            p = base / str(_require(raw, key, where))
            if not p.is_file():
                raise ValidationError(f"{where}: {key} file not found: {p}")
            paths[key] = p
        cases.append(ManifestCase(case_id, paths["measured"], paths["hud"], region, group))
    return CaseManifest(tuple(cases), output_dir, dump_maps, params)


@dataclass(frozen=True)
class CaseReport:
    id: str
    p: float
    m: float
    region: Region
    content_group: str
    params_fingerprint: str
    artifacts: tuple[tuple[str, str], ...] = ()

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "p": self.p,
            "m": self.m,
            "p_display": f"{self.p:.3f}",
            "m_display": f"{self.m:.3f}",
            "region": {"x": self.region.x, "y": self.region.y, "w": self.region.w, "h": self.region.h},
            "content_group": self.content_group,
            "artifacts": dict(self.artifacts),
        }


def rank_by_reduction(reports: list[CaseReport]) -> list[CaseReport]:
    """Order one content group's reports by the reduction index, descending.

    Refuses mixed groups: the indices only support ranking between cases that
    share identical content over the same background.
    """
    groups = {r.content_group for r in reports}
    if len(groups) > 1:
        raise ValidationError(
            f"cannot rank across content groups {sorted(groups)}; ranking is only "
            f"meaningful within one group"
        )
    return sorted(reports, key=lambda r: -r.m)


def group_rankings(reports: list[CaseReport]) -> dict[str, list[CaseReport]]:
    """Per-group rankings, group order following first appearance."""
    by_group: dict[str, list[CaseReport]] = {}
    for report in reports:
        by_group.setdefault(report.content_group, []).append(report)
    return {group: rank_by_reduction(members) for group, members in by_group.items()}


def report_document(reports: list[CaseReport], extra: dict | None = None) -> dict:
    """Aggregated report: cases in input order with per-group rankings appended."""
    doc = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "params_fingerprint": reports[0].params_fingerprint if reports else None,
    }
    if extra:
        doc.update(extra)
    doc["cases"] = [r.as_dict() for r in reports]
    doc["rankings"] = {
        group: [{"id": r.id, "m": r.m, "m_display": f"{r.m:.3f}"} for r in ranked]
        for group, ranked in group_rankings(reports).items()
    }
    return doc


def write_json_report(reports: list[CaseReport], path: str | os.PathLike, extra: dict | None = None) -> None:
    doc = report_document(reports, extra)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_csv_report(reports: list[CaseReport], path: str | os.PathLike) -> None:
    """Case table with the fixed header ``id,p,m,region,content_group``.

    CSV carries the 3-decimal display values; full precision lives in the JSON
    report only.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_CSV_HEADER)
        for r in reports:
            region = f"{r.region.x},{r.region.y},{r.region.w},{r.region.h}"
            writer.writerow([r.id, f"{r.p:.3f}", f"{r.m:.3f}", region, r.content_group])


def write_rankings_csv(reports: list[CaseReport], path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["content_group", "rank", "id", "m"])
        for group, ranked in group_rankings(reports).items():
            for position, r in enumerate(ranked, start=1):
                writer.writerow([group, position, r.id, f"{r.m:.3f}"])
