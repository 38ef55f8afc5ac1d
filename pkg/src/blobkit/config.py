"""Application configuration with layered sources.

Precedence: explicit overrides (CLI flags) > environment (BLOBKIT_*) >
config file > built-in defaults. The file format is flat ``key = value``
lines; '#' starts a comment. Keys, their env-var names, and types:

    listen_address          BLOBKIT_LISTEN_ADDRESS           host:port
    canvas_width            BLOBKIT_CANVAS_WIDTH             int >= 1
    canvas_height           BLOBKIT_CANVAS_HEIGHT            int >= 1
    max_blobs               BLOBKIT_MAX_BLOBS                int >= 1
    data_dir                BLOBKIT_DATA_DIR                 path
    fit_max_iterations      BLOBKIT_FIT_MAX_ITERATIONS       int >= 1
    fit_iou_tolerance       BLOBKIT_FIT_IOU_TOLERANCE        float >= 0
    fit_raster_scale        BLOBKIT_FIT_RASTER_SCALE         float in (0, 1]
    fit_refine              BLOBKIT_FIT_REFINE               bool
    fourier_num_frequencies BLOBKIT_FOURIER_NUM_FREQUENCIES  int >= 1
    fourier_base            BLOBKIT_FOURIER_BASE             float > 0
    fourier_scale           BLOBKIT_FOURIER_SCALE            float > 0

Booleans accept true/false/1/0/yes/no (case-insensitive).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

from .embedding import FourierConfig
from .errors import InvalidArgumentError, ParseError
from .fitting import FitConfig
from .geometry import DEFAULT_MAX_BLOBS, Canvas

ENV_PREFIX = "BLOBKIT_"

_DEFAULTS = {
    "listen_address": "127.0.0.1:8000",
    "canvas_width": 512,
    "canvas_height": 512,
    "max_blobs": DEFAULT_MAX_BLOBS,
    "data_dir": "blobkit-data",
    "fit_max_iterations": 200,
    "fit_iou_tolerance": 1e-3,
    "fit_raster_scale": 1.0,
    "fit_refine": True,
    "fourier_num_frequencies": 8,
    "fourier_base": 2.0,
    "fourier_scale": math.pi,
}


@dataclass(frozen=True)
class AppConfig:
    listen_address: str = "127.0.0.1:8000"
    default_canvas: Canvas = field(default_factory=Canvas)
    max_blobs: int = DEFAULT_MAX_BLOBS
    fit: FitConfig = field(default_factory=FitConfig)
    fourier: FourierConfig = field(default_factory=FourierConfig)
    data_dir: str = "blobkit-data"

    def __post_init__(self):
        if self.max_blobs < 1:
            raise InvalidArgumentError(f"max_blobs must be >= 1, got {self.max_blobs}")
        host, _, port = self.listen_address.rpartition(":")
        if not host or not port.isdigit() or not (0 < int(port) < 65536):
            raise InvalidArgumentError(
                f"listen_address must be host:port, got {self.listen_address!r}"
            )

    @property
    def host(self) -> str:
        return self.listen_address.rpartition(":")[0]

    @property
    def port(self) -> int:
        return int(self.listen_address.rpartition(":")[2])


def _coerce(key: str, raw, source: str):
    default = _DEFAULTS[key]
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in ("true", "1", "yes"):
            return True
        if text in ("false", "0", "no"):
            return False
        raise InvalidArgumentError(f"{source}: {key} must be a boolean, got {raw!r}")
    if isinstance(default, int):
        try:
            return int(str(raw).strip())
        except ValueError as exc:
            raise InvalidArgumentError(f"{source}: {key} must be an integer, got {raw!r}") from exc
    if isinstance(default, float):
        try:
            value = float(str(raw).strip())
        except ValueError as exc:
            raise InvalidArgumentError(f"{source}: {key} must be a number, got {raw!r}") from exc
        if not math.isfinite(value):
            raise InvalidArgumentError(f"{source}: {key} must be finite")
        return value
    return str(raw).strip()


def parse_config_file(text: str, source: str = "config file") -> dict:
    values = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, raw = line.partition("=")
        key = key.strip()
        if not eq or not key:
            raise ParseError(f"{source} line {line_number}: expected 'key = value'")
        if key not in _DEFAULTS:
            raise ParseError(f"{source} line {line_number}: unknown key {key!r}")
        values[key] = _coerce(key, raw, f"{source} line {line_number}")
    return values


def load_config(
    file_path: str | None = None,
    env: dict | None = None,
    overrides: dict | None = None,
) -> AppConfig:
    """Merge defaults <- file <- environment <- overrides, then validate."""
    merged = dict(_DEFAULTS)
    if file_path is not None:
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as exc:
            raise InvalidArgumentError(f"cannot read config file {file_path}: {exc}") from exc
        merged.update(parse_config_file(text, source=file_path))
    env = os.environ if env is None else env
    for key in _DEFAULTS:
        env_name = ENV_PREFIX + key.upper()
        if env_name in env:
            merged[key] = _coerce(key, env[env_name], f"environment {env_name}")
    for key, value in (overrides or {}).items():
        if key not in _DEFAULTS:
            raise InvalidArgumentError(f"unknown config key {key!r}")
        if value is not None:
            merged[key] = _coerce(key, value, "command line")
    return AppConfig(
        listen_address=merged["listen_address"],
        default_canvas=Canvas(merged["canvas_width"], merged["canvas_height"]),
        max_blobs=merged["max_blobs"],
        fit=FitConfig(
            max_iterations=merged["fit_max_iterations"],
            iou_tolerance=merged["fit_iou_tolerance"],
            raster_scale=merged["fit_raster_scale"],
            refine=merged["fit_refine"],
        ),
        fourier=FourierConfig(
            num_frequencies=merged["fourier_num_frequencies"],
            base=merged["fourier_base"],
            scale=merged["fourier_scale"],
        ),
        data_dir=merged["data_dir"],
    )
