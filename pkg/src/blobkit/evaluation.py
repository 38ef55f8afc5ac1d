"""Layout-level scoring: counting precision/recall/accuracy, spatial
relations by center comparison, and the mask/blob mIOU controllability
metric.

Category matching is deliberately loose (case-insensitive, hyphen/space
equivalent) because generated layout text varies; everything else is
strict: exact counts for accuracy, strict inequalities for relations, and
ties score as failures.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import InvalidArgumentError, ParseError
from .geometry import Blob, BlobLayout, BlobParameter, Canvas, mask_iou, rasterize
from .layout_text import normalize_category

RELATIONS = ("left-of", "right-of", "above", "below")


@dataclass(frozen=True)
class NumericalSpec:
    """Expected blob count per category."""

    counts: dict

    def __post_init__(self):
        if not self.counts:
            raise InvalidArgumentError("need at least one category")
        normalized = {}
        for category, count in self.counts.items():
            if not isinstance(count, int) or isinstance(count, bool) or count < 1:
                raise InvalidArgumentError(
                    f"count for {category!r} must be a positive integer, got {count!r}"
                )
            key = normalize_category(str(category))
            if not key:
                raise InvalidArgumentError(f"empty category name {category!r}")
            normalized[key] = normalized.get(key, 0) + count
        object.__setattr__(self, "counts", normalized)


@dataclass(frozen=True)
class SpatialSpec:
    subject: str
    relation: str
    object: str

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise InvalidArgumentError(
                f"relation must be one of {RELATIONS}, got {self.relation!r}"
            )
        if not self.subject.strip() or not self.object.strip():
            raise InvalidArgumentError("subject and object categories must be non-empty")


@dataclass(frozen=True)
class CaseResult:
    case_id: str
    accurate: bool
    detail: str = ""
    precision: float | None = None  # numerical cases only
    recall: float | None = None

    @property
    def is_numerical(self) -> bool:
        return self.precision is not None


@dataclass(frozen=True)
class MetricsReport:
    n_cases: int
    accuracy: float
    mean_precision: float | None  # None when no numerical cases
    mean_recall: float | None
    per_case: tuple


def _category_counts(layout: BlobLayout) -> dict:
    counts = {}
    for blob in layout.blobs:
        key = normalize_category(blob.category)
        counts[key] = counts.get(key, 0) + 1
    return counts


def score_numerical(spec: NumericalSpec, layout: BlobLayout, case_id: str = "") -> CaseResult:
    """Counting metrics: matched = sum of min(generated, expected) per category."""
    gen = _category_counts(layout)
    matched = sum(min(gen.get(cat, 0), want) for cat, want in spec.counts.items())
    total_generated = sum(gen.values())
    total_expected = sum(spec.counts.values())
    precision = matched / total_generated if total_generated else 0.0
    recall = matched / total_expected
    exact = all(gen.get(cat, 0) == want for cat, want in spec.counts.items())
    extras = sorted(set(gen) - set(spec.counts))
    accurate = exact and not extras
    if accurate:
        detail = "exact category counts"
    else:
        problems = []
        for cat, want in spec.counts.items():
            got = gen.get(cat, 0)
            if got != want:
                problems.append(f"{cat}: expected {want}, got {got}")
        if extras:
            problems.append("extra categories: " + ", ".join(extras))
        detail = "; ".join(problems)
    return CaseResult(
        case_id=case_id,
        accurate=accurate,
        detail=detail,
        precision=precision,
        recall=recall,
    )


def _first_blob(layout: BlobLayout, category: str):
    want = normalize_category(category)
    for i, blob in enumerate(layout.blobs):
        if normalize_category(blob.category) == want:
            return i, blob
    return None, None


def score_spatial(spec: SpatialSpec, layout: BlobLayout, case_id: str = "") -> CaseResult:
    """Center comparison between the first blob of each named category."""
    si, subject = _first_blob(layout, spec.subject)
    oi, obj = _first_blob(layout, spec.object)
    if subject is None:
        return CaseResult(case_id, accurate=False, detail="subject category absent")
    if obj is None:
        return CaseResult(case_id, accurate=False, detail="object category absent")
    if si == oi:
        return CaseResult(case_id, accurate=False, detail="tie (subject equals object)")
    ps, po = subject.parameter, obj.parameter
    if spec.relation in ("left-of", "right-of"):
        lhs, rhs = ps.cx, po.cx
        axis = "cx"
    else:
        lhs, rhs = ps.cy, po.cy  # y grows downward
        axis = "cy"
    if lhs == rhs:
        return CaseResult(case_id, accurate=False, detail="tie")
    satisfied = lhs < rhs if spec.relation in ("left-of", "above") else lhs > rhs
    detail = f"{axis} {lhs:g} vs {rhs:g}"
    return CaseResult(case_id, accurate=satisfied, detail=detail)


def controllability_miou(pairs, canvas: Canvas, return_details: bool = False):
    """Mean IOU between given masks and the rasterizations of their blobs.

    A pair whose mask and rasterized ellipse are both empty cannot be scored
    and contributes 0; such pairs are flagged in the details.
    """
    pairs = list(pairs)
    if not pairs:
        raise InvalidArgumentError("need at least one (mask, parameter) pair")
    per_pair = []
    flagged = []
    for i, (mask, parameter) in enumerate(pairs):
        if (mask.width, mask.height) != (canvas.width, canvas.height):
            raise InvalidArgumentError(
                f"pair {i}: mask is {mask.width}x{mask.height}, "
                f"canvas is {canvas.width}x{canvas.height}"
            )
        rendered = rasterize(parameter, canvas)
        if mask.foreground_count() == 0 and rendered.foreground_count() == 0:
            per_pair.append(0.0)
            flagged.append(i)
            continue
        per_pair.append(mask_iou(mask, rendered))
    mean = sum(per_pair) / len(per_pair)
    if return_details:
        return mean, tuple(per_pair), tuple(flagged)
    return mean


def aggregate(results) -> MetricsReport:
    """Unweighted means; precision/recall averaged over numerical cases only."""
    results = tuple(results)
    if not results:
        raise InvalidArgumentError("need at least one case result")
    numerical = [r for r in results if r.is_numerical]
    accuracy = sum(1 for r in results if r.accurate) / len(results)
    mean_p = sum(r.precision for r in numerical) / len(numerical) if numerical else None
    mean_r = sum(r.recall for r in numerical) / len(numerical) if numerical else None
    return MetricsReport(
        n_cases=len(results),
        accuracy=accuracy,
        mean_precision=mean_p,
        mean_recall=mean_r,
        per_case=results,
    )


def detections_to_layout(detections, canvas: Canvas) -> BlobLayout:
    """Adapter for external detector output: (category, cx, cy, w, h) boxes
    become axis-aligned ellipse blobs so detector results flow through the
    same scoring path."""
    blobs = []
    for i, det in enumerate(detections):
        if isinstance(det, dict):
            try:
                category = det["category"]
                cx, cy, w, h = det["cx"], det["cy"], det["w"], det["h"]
            except KeyError as exc:
                raise InvalidArgumentError(f"detection {i}: missing field {exc}") from exc
        else:
            if len(det) != 5:
                raise InvalidArgumentError(
                    f"detection {i}: expected (category, cx, cy, w, h), got {det!r}"
                )
            category, cx, cy, w, h = det
        if w <= 0 or h <= 0:
            raise InvalidArgumentError(f"detection {i}: box sides must be positive")
        parameter = BlobParameter(cx=cx, cy=cy, a=w / 2, b=h / 2, theta=0.0)
        blobs.append(Blob(parameter=parameter, description=str(category), category=str(category)))
    return BlobLayout(canvas=canvas, blobs=tuple(blobs))


@dataclass(frozen=True)
class BenchmarkCase:
    case_id: str
    kind: str  # "numerical" | "spatial"
    spec: object
    caption: str

    def score(self, layout: BlobLayout) -> CaseResult:
        if self.kind == "numerical":
            return score_numerical(self.spec, layout, case_id=self.case_id)
        return score_spatial(self.spec, layout, case_id=self.case_id)


def load_benchmark(text: str):
    """JSON-lines, one case per line:
    {"id": ..., "type": "numerical"|"spatial", "spec": {...}, "caption": ...}."""
    cases = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {line_number}: invalid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ParseError(f"line {line_number}: expected object")
        try:
            case_id = str(doc["id"])
            kind = doc["type"]
            spec_doc = doc["spec"]
        except KeyError as exc:
            raise ParseError(f"line {line_number}: missing field {exc}") from exc
        caption = str(doc.get("caption", ""))
        if kind == "numerical":
            if not isinstance(spec_doc, dict) or not isinstance(spec_doc.get("counts"), dict):
                raise ParseError(f"line {line_number}: spec.counts must be an object")
            spec = NumericalSpec(counts=dict(spec_doc["counts"]))
        elif kind == "spatial":
            try:
                spec = SpatialSpec(
                    subject=str(spec_doc["subject"]),
                    relation=str(spec_doc["relation"]),
                    object=str(spec_doc["object"]),
                )
            except (KeyError, TypeError) as exc:
                raise ParseError(f"line {line_number}: bad spatial spec: {exc}") from exc
        else:
            raise ParseError(f"line {line_number}: unknown case type {kind!r}")
        cases.append(BenchmarkCase(case_id=case_id, kind=kind, spec=spec, caption=caption))
    if not cases:
        raise ParseError("benchmark contains no cases")
    return tuple(cases)


def report_doc(report: MetricsReport) -> dict:
    """Plain-dict form of a MetricsReport, for embedding in responses."""
    return {
        "n_cases": report.n_cases,
        "accuracy": report.accuracy,
        "mean_precision": report.mean_precision,
        "mean_recall": report.mean_recall,
        "per_case": [
            {
                "case_id": r.case_id,
                "accurate": r.accurate,
                "detail": r.detail,
                "precision": r.precision,
                "recall": r.recall,
            }
            for r in report.per_case
        ],
    }


def report_to_json(report: MetricsReport) -> str:
    return json.dumps(report_doc(report), indent=2)
