"""Text wire formats for blob layouts.

Three formats live here:

* CSS-style parameter lines, one blob per line:
  ``<category> {major-radius: <n>px; minor-radius: <n>px; cx: <n>px;
  cy: <n>px; angle: <n>}`` with integer values and the angle in degrees
  folded into [0, 180). Parsing is deliberately tolerant: language-model
  output is noisy, so unparseable lines are collected in a rejects list
  instead of aborting, and unknown properties only produce warnings.

* Description lines, ``<category> {<sentence>}``, brace-delimited and
  multi-line tolerant; literal braces inside a sentence are written
  backslash-escaped.

* A lossless JSON schema
  {canvas: {w, h}, caption, blobs: [{category, cx, cy, a, b, theta_rad,
  description}]} for storage and the HTTP API.

The CSS and description formats are lossy by design (integer
quantization, no caption); JSON is the round-trip-exact format.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from .errors import InvalidArgumentError, ParseError
from .geometry import Blob, BlobLayout, BlobParameter, Canvas

# Canonical property order; also the reporting order for missing ones.
_CSS_PROPS = ("major-radius", "minor-radius", "cx", "cy", "angle")

# Strict integer-or-decimal token: no nan/inf/exponent sneaking through float().
_NUMBER_RE = re.compile(r"^[+-]?\d+(?:\.\d+)?$")

# category { body } with backslash escapes allowed inside the body
_DESC_BLOCK_RE = re.compile(r"(?P<cat>[^{}\n]+)\{(?P<body>(?:\\.|[^\\{}])*)\}", re.DOTALL)


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def normalize_category(name: str) -> str:
    """Case-insensitive with hyphen/space equivalence: 'Teddy-Bear' = 'teddy bear'."""
    return " ".join(name.replace("-", " ").lower().split())


@dataclass(frozen=True)
class CssBlobLine:
    category: str
    major_radius: int
    minor_radius: int
    cx: int
    cy: int
    angle: int

    def __post_init__(self):
        if not self.category.strip():
            raise InvalidArgumentError("category must be non-empty")
        if any(ch in self.category for ch in "{}\n"):
            raise InvalidArgumentError(f"category may not contain braces: {self.category!r}")
        if not (1 <= self.minor_radius <= self.major_radius):
            raise InvalidArgumentError(
                f"need major_radius >= minor_radius >= 1, "
                f"got {self.major_radius}, {self.minor_radius}"
            )
        if not (0 <= self.angle <= 180):
            raise InvalidArgumentError(f"angle must be in [0, 180], got {self.angle}")


@dataclass(frozen=True)
class RejectedLine:
    line_number: int
    text: str
    reason: str


@dataclass(frozen=True)
class CssParseResult:
    layout: BlobLayout
    rejects: tuple
    warnings: tuple


@dataclass(frozen=True)
class DescriptionLine:
    category: str
    sentence: str

    def __post_init__(self):
        if not self.category.strip():
            raise InvalidArgumentError("category must be non-empty")
        if any(ch in self.category for ch in "{}\n"):
            raise InvalidArgumentError(f"category may not contain braces: {self.category!r}")
        # the sentence is logical text; braces are legal here and get
        # backslash-escaped by the wire formatter
        if "\n" in self.sentence:
            raise InvalidArgumentError("sentence may not contain newlines")
        if not self.sentence.strip():
            raise InvalidArgumentError("sentence must be non-empty")


@dataclass(frozen=True)
class DescParseResult:
    lines: tuple
    rejects: tuple


def css_line_from_blob(blob: Blob, canvas: Canvas) -> CssBlobLine:
    """Quantize one blob to the CSS line domain (ints, clamped, folded angle)."""
    p = blob.parameter
    max_r = max(canvas.width, canvas.height)
    major = min(max(_round_half_away(p.a), 1), max_r)
    minor = min(max(_round_half_away(p.b), 1), max_r)
    minor = min(minor, major)  # rounding cannot break the ordering, clamping can
    cx = min(max(_round_half_away(p.cx), 0), canvas.width)
    cy = min(max(_round_half_away(p.cy), 0), canvas.height)
    angle = _round_half_away(math.degrees(p.theta) % 180.0)
    if angle == 180:
        angle = 0  # same ellipse; keep one representation
    return CssBlobLine(blob.category, major, minor, cx, cy, angle)


def format_css_line(line: CssBlobLine) -> str:
    return (
        f"{line.category} {{major-radius: {line.major_radius}px; "
        f"minor-radius: {line.minor_radius}px; cx: {line.cx}px; "
        f"cy: {line.cy}px; angle: {line.angle}}}"
    )


def serialize_css(layout: BlobLayout) -> str:
    """One CSS line per blob, in layout order."""
    return "\n".join(
        format_css_line(css_line_from_blob(blob, layout.canvas)) for blob in layout.blobs
    )


def _parse_css_value(name: str, raw: str):
    raw = raw.strip()
    if name != "angle" and raw.endswith("px"):
        raw = raw[:-2].strip()
    if not _NUMBER_RE.match(raw):
        return None
    return float(raw)


def _parse_css_line(text: str, warn):
    """One line -> (category, {prop: value}) or a rejection reason string."""
    open_idx = text.find("{")
    close_idx = text.rfind("}")
    if open_idx < 0 or close_idx < open_idx:
        return "no property block"
    category = text[:open_idx].strip()
    if not category:
        return "missing category"
    if "}" in category:
        return "brace before category"
    found = {}
    for part in text[open_idx + 1 : close_idx].split(";"):
        part = part.strip()
        if not part:
            continue
        name, colon, raw = part.partition(":")
        name = name.strip()
        if not colon:
            warn(f"property without value: {part!r}")
            continue
        if name not in _CSS_PROPS:
            warn(f"unknown property {name}")
            continue
        value = _parse_css_value(name, raw)
        if value is None:
            warn(f"unparseable value for {name}: {raw.strip()!r}")
            continue
        if name in found:
            warn(f"duplicate property {name}")
        found[name] = value
    missing = [p for p in _CSS_PROPS if p not in found]
    if missing:
        return "missing property " + ", ".join(missing)
    return category, found


def parse_css(text: str, canvas: Canvas) -> CssParseResult:
    """Tolerant line-by-line parse; unusable lines land in rejects, not errors.

    Raises a parse error (carrying the rejects) only when no line parses.
    """
    blobs = []
    rejects = []
    warnings = []
    saw_content = False
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        saw_content = True

        def warn(msg, _n=line_number):
            warnings.append(f"line {_n}: {msg}")

        outcome = _parse_css_line(stripped, warn)
        if isinstance(outcome, str):
            rejects.append(RejectedLine(line_number, stripped, outcome))
            continue
        category, props = outcome
        try:
            parameter = BlobParameter(
                cx=props["cx"],
                cy=props["cy"],
                a=props["major-radius"],
                b=props["minor-radius"],
                theta=math.radians(props["angle"]),
            )
            blob = Blob(parameter=parameter, description=category, category=category)
        except InvalidArgumentError as exc:
            rejects.append(RejectedLine(line_number, stripped, str(exc)))
            continue
        blobs.append(blob)
    if saw_content and not blobs:
        raise ParseError("no parseable layout lines", rejects=tuple(rejects))
    if not saw_content and not blobs:
        raise ParseError("empty input", rejects=())
    return CssParseResult(
        layout=BlobLayout(canvas=canvas, blobs=tuple(blobs)),
        rejects=tuple(rejects),
        warnings=tuple(warnings),
    )


def _escape_sentence(sentence: str) -> str:
    return sentence.replace("\\", "\\\\").replace("{", "\\{").replace("}", "\\}")


def _unescape_sentence(body: str) -> str:
    return re.sub(r"\\(.)", r"\1", body)


def format_description_line(line: DescriptionLine) -> str:
    """Wire form of one description: braces escaped, single line."""
    return f"{line.category} {{{_escape_sentence(line.sentence)}}}"


def serialize_descriptions(layout: BlobLayout) -> str:
    """One '<category> {<sentence>}' block per blob, newlines flattened."""
    lines = []
    for blob in layout.blobs:
        flat = " ".join(blob.description.splitlines())
        lines.append(format_description_line(DescriptionLine(blob.category, flat)))
    return "\n".join(lines)


def parse_descriptions(text: str) -> DescParseResult:
    """Brace-delimited blocks anywhere in the text; sentences may span lines."""
    lines = []
    rejects = []
    consumed_spans = []
    for m in _DESC_BLOCK_RE.finditer(text):
        category = m.group("cat").strip()
        sentence = " ".join(_unescape_sentence(m.group("body")).split())
        line_number = text.count("\n", 0, m.start()) + 1
        consumed_spans.append((m.start(), m.end()))
        if not category:
            rejects.append(RejectedLine(line_number, m.group(0)[:60], "missing category"))
            continue
        if not sentence:
            rejects.append(RejectedLine(line_number, m.group(0)[:60], "empty sentence"))
            continue
        lines.append(DescriptionLine(category=category, sentence=sentence))
    # anything outside consumed spans must be whitespace; otherwise reject it
    gaps = []
    pos = 0
    for start, end in consumed_spans:
        gaps.append((pos, start))
        pos = end
    gaps.append((pos, len(text)))
    for start, end in gaps:
        chunk = text[start:end]
        if not chunk.strip():
            continue
        base_line = text.count("\n", 0, start) + 1
        for offset, stray in enumerate(chunk.splitlines()):
            if not stray.strip():
                continue
            reason = (
                "unbalanced braces" if ("{" in stray or "}" in stray) else "no description block"
            )
            rejects.append(RejectedLine(base_line + offset, stray.strip(), reason))
    return DescParseResult(lines=tuple(lines), rejects=tuple(rejects))


def apply_descriptions(layout: BlobLayout, lines) -> tuple:
    """Pair description lines to blobs by category, in order of appearance.

    Returns (updated layout, unmatched description lines). Matching is
    positional within a category: the k-th description for category c lands
    on the k-th blob of category c.
    """
    taken = [False] * len(layout.blobs)
    blobs = list(layout.blobs)
    unmatched = []
    for line in lines:
        want = normalize_category(line.category)
        for i, blob in enumerate(blobs):
            if not taken[i] and normalize_category(blob.category) == want:
                blobs[i] = Blob(
                    parameter=blob.parameter,
                    description=line.sentence,
                    category=blob.category,
                )
                taken[i] = True
                break
        else:
            unmatched.append(line)
    return (
        BlobLayout(canvas=layout.canvas, blobs=tuple(blobs), global_caption=layout.global_caption),
        tuple(unmatched),
    )


def layout_doc(layout: BlobLayout) -> dict:
    """Plain-dict form of the canonical JSON schema, for embedding."""
    return {
        "canvas": {"w": layout.canvas.width, "h": layout.canvas.height},
        "caption": layout.global_caption,
        "blobs": [
            {
                "category": b.category,
                "cx": b.parameter.cx,
                "cy": b.parameter.cy,
                "a": b.parameter.a,
                "b": b.parameter.b,
                "theta_rad": b.parameter.theta,
                "description": b.description,
            }
            for b in layout.blobs
        ],
    }


def layout_json(layout: BlobLayout) -> str:
    """Lossless canonical JSON; the exact inverse of parse_json."""
    return json.dumps(layout_doc(layout), indent=2)


def _require(doc: dict, key: str, path: str):
    if key not in doc:
        raise ParseError(f"missing field: {path}{key}")
    return doc[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{path}: expected number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise ParseError(f"{path}: expected finite number")
    return value


def parse_json(text: str) -> BlobLayout:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return layout_from_doc(doc)


def layout_from_doc(doc) -> BlobLayout:
    """Validate an already-decoded canonical layout document."""
    if not isinstance(doc, dict):
        raise ParseError("expected object at top level")
    canvas_doc = _require(doc, "canvas", "")
    if not isinstance(canvas_doc, dict):
        raise ParseError("canvas: expected object")
    w = _require(canvas_doc, "w", "canvas.")
    h = _require(canvas_doc, "h", "canvas.")
    if not (isinstance(w, int) and isinstance(h, int)) or isinstance(w, bool) or isinstance(h, bool):
        raise ParseError("canvas.w, canvas.h: expected integers")
    try:
        canvas = Canvas(w, h)
    except InvalidArgumentError as exc:
        raise InvalidArgumentError(f"canvas: {exc}") from exc
    caption = doc.get("caption", "")
    if not isinstance(caption, str):
        raise ParseError("caption: expected string")
    blobs_doc = _require(doc, "blobs", "")
    if not isinstance(blobs_doc, list):
        raise ParseError("blobs: expected array")
    blobs = []
    for i, item in enumerate(blobs_doc):
        path = f"blobs[{i}]"
        if not isinstance(item, dict):
            raise ParseError(f"{path}: expected object")
        category = _require(item, "category", path + ".")
        if not isinstance(category, str) or not category.strip():
            raise ParseError(f"{path}.category: expected non-empty string")
        numbers = {
            key: _number(_require(item, key, path + "."), f"{path}.{key}")
            for key in ("cx", "cy", "a", "b")
        }
        theta = _number(item.get("theta_rad", 0.0), f"{path}.theta_rad")
        description = item.get("description", category)
        if not isinstance(description, str):
            raise ParseError(f"{path}.description: expected string")
        try:
            parameter = BlobParameter(theta=theta, **numbers)
            blobs.append(Blob(parameter=parameter, description=description, category=category))
        except InvalidArgumentError as exc:
            raise InvalidArgumentError(f"{path}: {exc}") from exc
    return BlobLayout(canvas=canvas, blobs=tuple(blobs), global_caption=caption)
