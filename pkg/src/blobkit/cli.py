"""Command-line interface.

Machine-readable output (JSON, PGM, SVG, prompt text) goes to standard
output and is byte-stable for identical inputs; human diagnostics go to
standard error. Exit codes: 0 success, 1 usage error, 2 data error
(unparseable input, invariant violation, missing file).

Subcommands: fit, rasterize, render, parse, serialize, prompt-param,
prompt-desc, attention-demo, eval, serve. Pass '-' as an input path to
read standard input.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from .attention import (
    BlobTokens,
    FeatureGrid,
    masked_cross_attention,
    standard_cross_attention,
)
from .config import load_config
from .errors import BlobkitError, ParseError
from .evaluation import aggregate, load_benchmark, report_to_json
from .fitting import FitConfig, fit_ellipse
from .geometry import BinaryMask, BlobLayout, Canvas, rasterize
from .layout_text import layout_from_doc, layout_json, parse_css, serialize_css
from .pgm import read_pgm, write_pgm
from .prompts import PromptBundle, build_description_prompt, build_parameter_prompt
from .render import render_svg
from .service import create_app, fit_result_doc, prompt_bundle_from_doc


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this tool reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _load_layout(path: str) -> BlobLayout:
    return layout_from_doc(_parse_json_text(_read_text(path), path))


def _parse_json_text(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: invalid JSON: {exc}") from exc


def _print_json(doc):
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def _canvas_args(args) -> Canvas:
    return Canvas(args.width, args.height)


def _cmd_fit(args) -> int:
    mask = read_pgm(_read_bytes(args.mask))
    config = FitConfig(
        max_iterations=args.max_iterations,
        iou_tolerance=args.iou_tolerance,
        raster_scale=args.raster_scale,
        refine=not args.no_refine,
    )
    result = fit_ellipse(mask, config)
    _print_json(fit_result_doc(result))
    return 0


def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-") or "blob"


def _cmd_rasterize(args) -> int:
    layout = _load_layout(args.layout)
    canvas = layout.canvas
    if args.blob is not None:
        if not 0 <= args.blob < len(layout.blobs):
            raise ParseError(f"--blob: index {args.blob} out of range for {len(layout.blobs)} blobs")
        mask = rasterize(layout.blobs[args.blob].parameter, canvas)
        sys.stdout.buffer.write(write_pgm(mask))
        return 0
    if args.out_dir is not None:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        files = []
        for index, blob in enumerate(layout.blobs):
            mask = rasterize(blob.parameter, canvas)
            name = f"blob_{index:03d}_{_slug(blob.category)}.pgm"
            (out_dir / name).write_bytes(write_pgm(mask))
            files.append(name)
        _print_json({"directory": str(out_dir), "files": files})
        return 0
    combined = np.zeros((canvas.height, canvas.width), dtype=bool)
    for blob in layout.blobs:
        combined |= rasterize(blob.parameter, canvas).array
    sys.stdout.buffer.write(write_pgm(BinaryMask(combined)))
    return 0


def _cmd_render(args) -> int:
    layout = _load_layout(args.layout)
    sys.stdout.write(render_svg(layout, include_labels=not args.no_labels))
    return 0


def _cmd_parse(args) -> int:
    result = parse_css(_read_text(args.css), _canvas_args(args))
    for reject in result.rejects:
        sys.stderr.write(f"rejected line {reject.line_number}: {reject.reason}: {reject.text}\n")
    for warning in result.warnings:
        sys.stderr.write(f"warning: {warning}\n")
    sys.stdout.write(layout_json(result.layout) + "\n")
    return 0


def _cmd_serialize(args) -> int:
    layout = _load_layout(args.layout)
    sys.stdout.write(serialize_css(layout) + "\n")
    return 0


def _load_bundle(path: str, want_descriptions: bool) -> PromptBundle:
    doc = _parse_json_text(_read_text(path), path)
    return prompt_bundle_from_doc(doc, want_descriptions)


def _cmd_prompt_param(args) -> int:
    bundle = _load_bundle(args.bundle, want_descriptions=False)
    sys.stdout.write(build_parameter_prompt(bundle, _canvas_args(args)))
    return 0


def _cmd_prompt_desc(args) -> int:
    bundle = _load_bundle(args.bundle, want_descriptions=True)
    sys.stdout.write(build_description_prompt(bundle))
    return 0


def _matrix(doc, path: str) -> np.ndarray:
    try:
        arr = np.asarray(doc, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: expected a rectangular numeric array") from exc
    if arr.ndim != 2:
        raise ParseError(f"{path}: expected a 2-D array")
    return arr


def _bit_vector(doc, path: str) -> np.ndarray:
    if not isinstance(doc, list) or any(item not in (0, 1, True, False) for item in doc):
        raise ParseError(f"{path}: expected a list of 0/1 bits")
    return np.asarray(doc, dtype=bool)


def _cmd_attention_demo(args) -> int:
    doc = _parse_json_text(_read_text(args.instance), args.instance)
    if not isinstance(doc, dict) or "g" not in doc or "blobs" not in doc:
        raise ParseError("instance: expected object with g and blobs")
    g_doc = doc["g"]
    if not isinstance(g_doc, dict):
        raise ParseError("g: expected object with h, w, values")
    h, w = g_doc.get("h"), g_doc.get("w")
    for name, value in (("h", h), ("w", w)):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"g.{name}: expected integer")
    grid = FeatureGrid(h=h, w=w, values=_matrix(g_doc.get("values"), "g.values"))
    if not isinstance(doc["blobs"], list):
        raise ParseError("blobs: expected array")
    blobs = []
    for i, blob_doc in enumerate(doc["blobs"]):
        if not isinstance(blob_doc, dict):
            raise ParseError(f"blobs[{i}]: expected object")
        blobs.append(
            BlobTokens(
                keys=_matrix(blob_doc.get("keys"), f"blobs[{i}].keys"),
                values_mat=_matrix(blob_doc.get("values"), f"blobs[{i}].values"),
                mask=_bit_vector(blob_doc.get("mask"), f"blobs[{i}].mask"),
            )
        )
    masked = bool(doc.get("masked", True))
    if masked:
        output, weights = masked_cross_attention(grid, blobs, return_weights=True)
    else:
        output, weights = standard_cross_attention(grid, blobs, return_weights=True)
    _print_json({
        "masked": masked,
        "output": output.tolist(),
        "weights": weights.tolist(),
    })
    return 0


def _cmd_eval(args) -> int:
    cases = load_benchmark(_read_text(args.benchmark))
    layout_dir = Path(args.layouts)
    if not layout_dir.is_dir():
        raise ParseError(f"layout directory not found: {layout_dir}")
    empty = BlobLayout(canvas=_canvas_args(args))
    results = []
    for case in cases:
        path = layout_dir / f"{case.case_id}.json"
        if path.exists():
            layout = _load_layout(str(path))
        else:
            sys.stderr.write(f"no layout file for case {case.case_id}; scoring empty layout\n")
            layout = empty
        results.append(case.score(layout))
    sys.stdout.write(report_to_json(aggregate(results)) + "\n")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    overrides = {
        "listen_address": args.listen,
        "data_dir": args.data_dir,
        "max_blobs": args.max_blobs,
        "canvas_width": args.canvas_width,
        "canvas_height": args.canvas_height,
    }
    config = load_config(file_path=args.config, overrides=overrides)
    app = create_app(config)
    sys.stderr.write(f"serving on http://{config.listen_address} (data: {config.data_dir})\n")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def _add_canvas_flags(parser, width=512, height=512):
    parser.add_argument("--width", type=int, default=width, help="canvas width in px")
    parser.add_argument("--height", type=int, default=height, help="canvas height in px")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blobkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("fit", help="fit an ellipse to a PGM mask, print FitResult JSON")
    p.add_argument("mask", help="PGM file ('-' for stdin)")
    p.add_argument("--max-iterations", type=int, default=200)
    p.add_argument("--iou-tolerance", type=float, default=1e-3)
    p.add_argument("--raster-scale", type=float, default=1.0)
    p.add_argument("--no-refine", action="store_true", help="moment initialization only")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("rasterize", help="layout JSON to PGM masks")
    p.add_argument("layout", help="layout JSON file ('-' for stdin)")
    p.add_argument("--blob", type=int, default=None, help="emit only this blob's mask")
    p.add_argument("--out-dir", default=None, help="write one PGM per blob here")
    p.set_defaults(func=_cmd_rasterize)

    p = sub.add_parser("render", help="layout JSON to SVG")
    p.add_argument("layout", help="layout JSON file ('-' for stdin)")
    p.add_argument("--no-labels", action="store_true")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("parse", help="CSS layout text to canonical layout JSON")
    p.add_argument("css", help="CSS text file ('-' for stdin)")
    _add_canvas_flags(p)
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("serialize", help="layout JSON to CSS layout text")
    p.add_argument("layout", help="layout JSON file ('-' for stdin)")
    p.set_defaults(func=_cmd_serialize)

    p = sub.add_parser("prompt-param", help="bundle JSON to a layout-planning prompt")
    p.add_argument("bundle", help="bundle JSON file ('-' for stdin)")
    _add_canvas_flags(p)
    p.set_defaults(func=_cmd_prompt_param)

    p = sub.add_parser("prompt-desc", help="bundle JSON to a region-description prompt")
    p.add_argument("bundle", help="bundle JSON file ('-' for stdin)")
    p.set_defaults(func=_cmd_prompt_desc)

    p = sub.add_parser("attention-demo", help="run cross-attention on a JSON instance")
    p.add_argument("instance", help="instance JSON file ('-' for stdin)")
    p.set_defaults(func=_cmd_attention_demo)

    p = sub.add_parser("eval", help="score layouts against a benchmark")
    p.add_argument("benchmark", help="benchmark JSONL file")
    p.add_argument("layouts", help="directory of <case_id>.json layout files")
    _add_canvas_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--config", default=None, help="key-value config file")
    p.add_argument("--listen", default=None, help="host:port")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--max-blobs", type=int, default=None)
    p.add_argument("--canvas-width", type=int, default=None)
    p.add_argument("--canvas-height", type=int, default=None)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BlobkitError as exc:
        message = exc.args[0] if exc.args else str(exc)
        sys.stderr.write(f"error: {message}\n")
        return 2
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
