"""HTTP JSON API over the layout store and the geometry/fit/eval modules.

Error mapping: 400 malformed input (unparseable JSON, missing fields,
wrong shapes), 404 unknown record id, 409 stale revision, 422 structurally
valid input that violates a domain invariant (the message names the
offending field). Request bodies are parsed by hand so that distinction
stays under our control rather than a schema library's.

Mask transport uses run-length encoding: the mask is flattened row-major
and encoded as alternating run lengths [n0, n1, n0, ...] starting with a
background (0) run, which may be zero-length. Sum of runs == width*height.
"""

from __future__ import annotations

import json

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from .attention import downsample_mask
from .config import AppConfig
from .errors import (
    DegenerateInputError,
    InvalidArgumentError,
    NotFoundError,
    ParseError,
    StaleRevisionError,
)
from .evaluation import aggregate, load_benchmark, report_doc
from .fitting import FitConfig, FitResult, fit_ellipse
from .geometry import (
    AddBlob,
    BinaryMask,
    Blob,
    BlobLayout,
    BlobParameter,
    Canvas,
    MoveBlob,
    RemoveBlob,
    ResizeBlob,
    RotateBlob,
    SetDescription,
    mask_iou,
    rasterize,
)
from .layout_text import (
    DescriptionLine,
    layout_from_doc,
    layout_json,
    parse_css,
    parse_json,
    serialize_css,
)
from .pgm import read_pgm
from .prompts import PromptBundle, build_description_prompt, build_parameter_prompt
from .store import LayoutStore


def rle_encode(mask: BinaryMask) -> list:
    flat = np.asarray(mask.array, dtype=bool).reshape(-1)
    runs = [0]  # first run counts background bits and may stay 0
    current = False
    for length, value in _runs(flat):
        if value == current:
            runs[-1] += length
        else:
            runs.append(length)
            current = value
    return runs


def _runs(flat: np.ndarray):
    if flat.size == 0:
        return
    boundaries = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [flat.size]))
    for start, end in zip(starts, ends):
        yield int(end - start), bool(flat[start])


def rle_decode(runs, width: int, height: int) -> BinaryMask:
    if not isinstance(runs, (list, tuple)) or any(
        isinstance(r, bool) or not isinstance(r, int) or r < 0 for r in runs
    ):
        raise ParseError("rle: expected a list of non-negative integers")
    total = sum(runs)
    if total != width * height:
        raise ParseError(f"rle: run lengths sum to {total}, expected {width * height}")
    flat = np.zeros(width * height, dtype=bool)
    pos = 0
    value = False
    for run in runs:
        if value:
            flat[pos : pos + run] = True
        pos += run
        value = not value
    return BinaryMask(flat.reshape(height, width))


def fit_result_doc(result: FitResult) -> dict:
    p = result.parameter
    return {
        "parameter": {"cx": p.cx, "cy": p.cy, "a": p.a, "b": p.b, "theta_rad": p.theta},
        "iou": result.iou,
        "initial_iou": result.initial_iou,
        "iterations_used": result.iterations_used,
    }


def _error_payload(exc: Exception) -> dict:
    message = exc.args[0] if exc.args else str(exc)
    return {"error": str(message)}


def _require(doc: dict, key: str, path: str = ""):
    if not isinstance(doc, dict):
        raise ParseError(f"{path or 'body'}: expected object")
    if key not in doc:
        raise ParseError(f"missing field: {path}{key}")
    return doc[key]


def _int_field(doc: dict, key: str, path: str = "") -> int:
    value = _require(doc, key, path)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{path}{key}: expected integer")
    return value


def _float_field(doc: dict, key: str, path: str = "") -> float:
    value = _require(doc, key, path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{path}{key}: expected number")
    return float(value)


def _str_field(doc: dict, key: str, path: str = "") -> str:
    value = _require(doc, key, path)
    if not isinstance(value, str):
        raise ParseError(f"{path}{key}: expected string")
    return value


async def _json_body(request: Request):
    raw = await request.body()
    try:
        return json.loads(raw)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid JSON body: {exc}") from exc


def _canvas_from(doc, default: Canvas, path: str = "canvas") -> Canvas:
    if doc is None:
        return default
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected object")
    w = _int_field(doc, "w", path + ".")
    h = _int_field(doc, "h", path + ".")
    try:
        return Canvas(w, h)
    except InvalidArgumentError as exc:
        raise InvalidArgumentError(f"{path}: {exc}") from exc


def _parameter_from(doc, path: str = "blob") -> BlobParameter:
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected object")
    numbers = {key: _float_field(doc, key, path + ".") for key in ("cx", "cy", "a", "b")}
    theta = 0.0
    if "theta_rad" in doc:
        theta = _float_field(doc, "theta_rad", path + ".")
    try:
        return BlobParameter(theta=theta, **numbers)
    except InvalidArgumentError as exc:
        raise InvalidArgumentError(f"{path}: {exc}") from exc


def _blob_from(doc, path: str = "blob") -> Blob:
    parameter = _parameter_from(doc, path)
    category = _str_field(doc, "category", path + ".")
    description = doc.get("description", category)
    if not isinstance(description, str):
        raise ParseError(f"{path}.description: expected string")
    try:
        return Blob(parameter=parameter, description=description, category=category)
    except InvalidArgumentError as exc:
        raise InvalidArgumentError(f"{path}: {exc}") from exc


def _demo_payload(entry, want_descriptions: bool):
    if isinstance(entry, str):
        return entry
    if isinstance(entry, dict):
        return layout_from_doc(entry)
    if want_descriptions and isinstance(entry, list):
        lines = []
        for i, item in enumerate(entry):
            if not isinstance(item, dict):
                raise ParseError(f"demonstrations: payload[{i}]: expected object")
            if "category" not in item or "sentence" not in item:
                raise ParseError(f"demonstrations: payload[{i}]: need category and sentence")
            lines.append(DescriptionLine(category=item["category"], sentence=item["sentence"]))
        return tuple(lines)
    raise ParseError("demonstrations: payload must be raw text or a layout object"
                     + (" or a list of description lines" if want_descriptions else ""))


def prompt_bundle_from_doc(doc, want_descriptions: bool) -> PromptBundle:
    """Decode {test_caption, demonstrations: [[caption, payload], ...]}.

    A demonstration payload is raw prompt text, a layout document, or (for
    description prompts) a list of {category, sentence} objects.
    """
    if not isinstance(doc, dict):
        raise ParseError("bundle: expected object")
    if "test_caption" not in doc or not isinstance(doc["test_caption"], str):
        raise ParseError("bundle: test_caption: expected string")
    demos = []
    for i, entry in enumerate(doc.get("demonstrations", [])):
        if not isinstance(entry, (list, tuple)) or len(entry) != 2 or not isinstance(entry[0], str):
            raise ParseError(f"bundle: demonstrations[{i}]: expected [caption, payload]")
        demos.append((entry[0], _demo_payload(entry[1], want_descriptions)))
    instruction = doc.get("system_instruction", "")
    if not isinstance(instruction, str):
        raise ParseError("bundle: system_instruction: expected string")
    return PromptBundle(
        test_caption=doc["test_caption"],
        demonstrations=tuple(demos),
        system_instruction=instruction,
    )


def _edit_from(doc) -> tuple:
    """Returns (edit, optional expected revision)."""
    op = _str_field(doc, "op")
    revision = None
    if "revision" in doc:
        revision = _int_field(doc, "revision")
    if op == "move":
        edit = MoveBlob(
            index=_int_field(doc, "index"),
            cx=_float_field(doc, "cx"),
            cy=_float_field(doc, "cy"),
        )
    elif op == "rotate":
        edit = RotateBlob(index=_int_field(doc, "index"), theta=_float_field(doc, "theta_rad"))
    elif op == "resize":
        edit = ResizeBlob(
            index=_int_field(doc, "index"),
            a=_float_field(doc, "a"),
            b=_float_field(doc, "b"),
        )
    elif op == "set_description":
        edit = SetDescription(index=_int_field(doc, "index"), text=_str_field(doc, "description"))
    elif op == "add":
        edit = AddBlob(blob=_blob_from(_require(doc, "blob")))
    elif op == "remove":
        edit = RemoveBlob(index=_int_field(doc, "index"))
    else:
        raise ParseError(
            f"op: expected one of move, rotate, resize, set_description, add, remove; got {op!r}"
        )
    return edit, revision


def _enforce_blob_cap(layout: BlobLayout, max_blobs: int):
    if len(layout.blobs) > max_blobs:
        raise InvalidArgumentError(
            f"blobs: at most {max_blobs} blobs per layout, got {len(layout.blobs)}"
        )


def create_app(config: AppConfig | None = None, store: LayoutStore | None = None) -> FastAPI:
    config = config or AppConfig()
    if store is None:
        store = LayoutStore(config.data_dir)
    app = FastAPI(title="blobkit", docs_url=None, redoc_url=None)
    app.state.config = config
    app.state.store = store
    # Editor pages are served separately (file:// or any static server), so
    # the API answers cross-origin requests; no cookies or credentials exist.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ParseError)
    async def _parse_error(_request, exc: ParseError):
        payload = _error_payload(exc)
        if exc.rejects:
            payload["rejects"] = [
                {"line_number": r.line_number, "text": r.text, "reason": r.reason}
                for r in exc.rejects
            ]
        return JSONResponse(payload, status_code=400)

    @app.exception_handler(NotFoundError)
    async def _not_found(_request, exc: NotFoundError):
        return JSONResponse(_error_payload(exc), status_code=404)

    @app.exception_handler(StaleRevisionError)
    async def _stale(_request, exc: StaleRevisionError):
        payload = _error_payload(exc)
        payload["expected"] = exc.expected
        payload["got"] = exc.got
        return JSONResponse(payload, status_code=409)

    @app.exception_handler(InvalidArgumentError)
    async def _invalid(_request, exc: InvalidArgumentError):
        return JSONResponse(_error_payload(exc), status_code=422)

    @app.exception_handler(DegenerateInputError)
    async def _degenerate(_request, exc: DegenerateInputError):
        return JSONResponse(_error_payload(exc), status_code=422)

    @app.exception_handler(RequestValidationError)
    async def _request_invalid(_request, exc: RequestValidationError):
        return JSONResponse({"error": str(exc)}, status_code=400)

    @app.exception_handler(OSError)
    async def _storage_failure(_request, exc: OSError):
        return JSONResponse({"error": f"storage failure: {exc}"}, status_code=500)

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/layouts", status_code=201)
    async def create_layout(request: Request):
        layout = layout_from_doc(await _json_body(request))
        _enforce_blob_cap(layout, config.max_blobs)
        return store.create(layout).to_doc()

    @app.get("/layouts/{record_id}")
    async def get_layout(record_id: str):
        return store.get(record_id).to_doc()

    @app.put("/layouts/{record_id}")
    async def put_layout(record_id: str, request: Request):
        doc = await _json_body(request)
        revision = _int_field(doc, "revision")
        layout = layout_from_doc(_require(doc, "layout"))
        _enforce_blob_cap(layout, config.max_blobs)
        return store.put(record_id, layout, revision).to_doc()

    @app.post("/layouts/{record_id}/edit")
    async def edit_record(record_id: str, request: Request):
        edit, revision = _edit_from(await _json_body(request))
        try:
            record = store.apply_edit(
                record_id, edit, expected_revision=revision, max_blobs=config.max_blobs
            )
        except IndexError as exc:
            raise InvalidArgumentError(f"index: {exc}") from exc
        return record.to_doc()

    @app.post("/fit")
    async def fit(request: Request):
        mask = read_pgm(await request.body())
        params = request.query_params
        fit_config = config.fit
        updates = {}
        try:
            if "max_iterations" in params:
                updates["max_iterations"] = int(params["max_iterations"])
            if "iou_tolerance" in params:
                updates["iou_tolerance"] = float(params["iou_tolerance"])
            if "raster_scale" in params:
                updates["raster_scale"] = float(params["raster_scale"])
            if "refine" in params:
                updates["refine"] = params["refine"].lower() not in ("false", "0", "no")
        except ValueError as exc:
            raise ParseError(f"query: {exc}") from exc
        if updates:
            fit_config = FitConfig(
                max_iterations=updates.get("max_iterations", fit_config.max_iterations),
                iou_tolerance=updates.get("iou_tolerance", fit_config.iou_tolerance),
                raster_scale=updates.get("raster_scale", fit_config.raster_scale),
                refine=updates.get("refine", fit_config.refine),
            )
        return fit_result_doc(fit_ellipse(mask, fit_config))

    @app.post("/rasterize")
    async def rasterize_layout(request: Request):
        layout = layout_from_doc(await _json_body(request))
        masks = []
        for index, blob in enumerate(layout.blobs):
            mask = rasterize(blob.parameter, layout.canvas)
            masks.append(
                {
                    "index": index,
                    "category": blob.category,
                    "foreground": mask.foreground_count(),
                    "rle": rle_encode(mask),
                }
            )
        return {
            "width": layout.canvas.width,
            "height": layout.canvas.height,
            "masks": masks,
        }

    @app.post("/diagnostics")
    async def diagnostics(request: Request):
        layout = layout_from_doc(await _json_body(request))
        n = len(layout.blobs)
        masks = [rasterize(b.parameter, layout.canvas) for b in layout.blobs]
        counts = [m.foreground_count() for m in masks]
        ious = [[0.0] * n for _ in range(n)]
        for i in range(n):
            ious[i][i] = 1.0 if counts[i] else 0.0
            for j in range(i + 1, n):
                if counts[i] == 0 and counts[j] == 0:
                    value = 0.0
                else:
                    value = mask_iou(masks[i], masks[j])
                ious[i][j] = value
                ious[j][i] = value
        union = np.zeros((layout.canvas.height, layout.canvas.width), dtype=bool)
        for mask in masks:
            union |= mask.array
        return {
            "pairwise_ious": ious,
            "out_of_canvas": [b.parameter.extends_beyond(layout.canvas) for b in layout.blobs],
            "coverage": float(union.sum()) / (layout.canvas.width * layout.canvas.height),
            "empty_masks": [i for i, c in enumerate(counts) if c == 0],
        }

    @app.post("/attention-mask")
    async def attention_mask(request: Request):
        doc = await _json_body(request)
        canvas = _canvas_from(doc.get("canvas") if isinstance(doc, dict) else None,
                              config.default_canvas)
        parameter = _parameter_from(_require(doc, "blob"))
        h = _int_field(doc, "h")
        w = _int_field(doc, "w")
        bits = downsample_mask(rasterize(parameter, canvas), h, w)
        return {"h": h, "w": w, "bits": [int(b) for b in bits]}

    @app.post("/prompt")
    async def prompt(request: Request):
        doc = await _json_body(request)
        if not isinstance(doc, dict):
            raise ParseError("bundle: expected object")
        kind = _str_field(doc, "kind")
        if kind == "parameter":
            bundle = prompt_bundle_from_doc(doc, want_descriptions=False)
            canvas = _canvas_from(doc.get("canvas"), config.default_canvas)
            text = build_parameter_prompt(bundle, canvas)
        elif kind == "description":
            bundle = prompt_bundle_from_doc(doc, want_descriptions=True)
            text = build_description_prompt(bundle)
        else:
            raise ParseError(f"kind: expected parameter or description, got {kind!r}")
        return {"kind": kind, "text": text}

    @app.post("/eval")
    async def evaluate(request: Request):
        doc = await _json_body(request)
        cases = load_benchmark(_str_field(doc, "benchmark"))
        layouts_doc = doc.get("layouts", {})
        if not isinstance(layouts_doc, dict):
            raise ParseError("layouts: expected object keyed by case id")
        empty = BlobLayout(canvas=config.default_canvas)
        results = []
        for case in cases:
            layout_entry = layouts_doc.get(case.case_id)
            if layout_entry is None:
                layout = empty
            else:
                try:
                    layout = layout_from_doc(layout_entry)
                except (ParseError, InvalidArgumentError) as exc:
                    raise type(exc)(f"layouts[{case.case_id!r}]: {exc.args[0]}") from exc
            results.append(case.score(layout))
        return report_doc(aggregate(results))

    @app.get("/export/{record_id}")
    async def export(record_id: str, format: str = "json"):
        record = store.get(record_id)
        if format == "css":
            return PlainTextResponse(serialize_css(record.layout))
        if format == "json":
            return Response(layout_json(record.layout), media_type="application/json")
        raise ParseError(f"format: expected css or json, got {format!r}")

    @app.post("/import", status_code=201)
    async def import_layout(request: Request):
        doc = await _json_body(request)
        format_name = _str_field(doc, "format")
        text = _str_field(doc, "text")
        rejects = []
        warnings = []
        if format_name == "css":
            canvas = _canvas_from(doc.get("canvas"), config.default_canvas)
            result = parse_css(text, canvas)
            layout = result.layout
            rejects = [
                {"line_number": r.line_number, "text": r.text, "reason": r.reason}
                for r in result.rejects
            ]
            warnings = list(result.warnings)
        elif format_name == "json":
            layout = parse_json(text)
        else:
            raise ParseError(f"format: expected css or json, got {format_name!r}")
        _enforce_blob_cap(layout, config.max_blobs)
        record = store.create(layout)
        payload = record.to_doc()
        payload["rejects"] = rejects
        payload["warnings"] = warnings
        return payload

    return app
