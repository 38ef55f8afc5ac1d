"""Elliptical blob scene layouts.

Geometry and rasterization of tilted ellipses, IOU-maximizing ellipse
fitting, Fourier/MLP blob embeddings, masked cross-attention, CSS and
JSON wire formats, prompt assembly, layout metrics, plus an HTTP service
and CLI. See README.md for the tour.
"""

from __future__ import annotations

from .attention import (
    BlobTokens,
    FeatureGrid,
    ProjectionSet,
    downsample_mask,
    gated_residual,
    masked_cross_attention,
    project,
    standard_cross_attention,
)
from .config import AppConfig, load_config
from .embedding import (
    FourierConfig,
    FusionMap,
    TokenEmbeddingMatrix,
    blob_embedding,
    encode_parameter,
    fourier_features,
)
from .errors import (
    BlobkitError,
    DegenerateInputError,
    InvalidArgumentError,
    NotFoundError,
    ParseError,
    StaleRevisionError,
)
from .evaluation import (
    BenchmarkCase,
    CaseResult,
    MetricsReport,
    NumericalSpec,
    SpatialSpec,
    aggregate,
    controllability_miou,
    detections_to_layout,
    load_benchmark,
    score_numerical,
    score_spatial,
)
from .fitting import FitConfig, FitResult, fit_ellipse, moment_init
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
    canonicalize_angle,
    contains_point,
    edit_layout,
    ellipse_iou,
    mask_iou,
    rasterize,
)
from .layout_text import (
    CssParseResult,
    DescriptionLine,
    layout_json,
    normalize_category,
    parse_css,
    parse_descriptions,
    parse_json,
    serialize_css,
    serialize_descriptions,
)
from .pgm import read_pgm, write_pgm
from .prompts import PromptBundle, build_description_prompt, build_parameter_prompt
from .render import render_svg
from .service import create_app, fit_result_doc, prompt_bundle_from_doc, rle_decode, rle_encode
from .store import LayoutRecord, LayoutStore

__version__ = "0.1.0"

__all__ = [
    "AddBlob",
    "AppConfig",
    "BenchmarkCase",
    "BinaryMask",
    "Blob",
    "BlobLayout",
    "BlobParameter",
    "BlobTokens",
    "BlobkitError",
    "Canvas",
    "CaseResult",
    "CssParseResult",
    "DegenerateInputError",
    "DescriptionLine",
    "FeatureGrid",
    "FitConfig",
    "FitResult",
    "FourierConfig",
    "FusionMap",
    "InvalidArgumentError",
    "LayoutRecord",
    "LayoutStore",
    "MetricsReport",
    "MoveBlob",
    "NotFoundError",
    "NumericalSpec",
    "ParseError",
    "ProjectionSet",
    "RemoveBlob",
    "ResizeBlob",
    "RotateBlob",
    "SetDescription",
    "SpatialSpec",
    "StaleRevisionError",
    "TokenEmbeddingMatrix",
    "aggregate",
    "blob_embedding",
    "build_description_prompt",
    "build_parameter_prompt",
    "canonicalize_angle",
    "contains_point",
    "controllability_miou",
    "create_app",
    "detections_to_layout",
    "downsample_mask",
    "edit_layout",
    "ellipse_iou",
    "encode_parameter",
    "fit_ellipse",
    "fit_result_doc",
    "fourier_features",
    "gated_residual",
    "layout_json",
    "load_benchmark",
    "load_config",
    "mask_iou",
    "masked_cross_attention",
    "moment_init",
    "normalize_category",
    "parse_css",
    "parse_descriptions",
    "parse_json",
    "project",
    "prompt_bundle_from_doc",
    "rasterize",
    "read_pgm",
    "render_svg",
    "rle_decode",
    "rle_encode",
    "score_numerical",
    "score_spatial",
    "serialize_css",
    "serialize_descriptions",
    "standard_cross_attention",
    "write_pgm",
]
