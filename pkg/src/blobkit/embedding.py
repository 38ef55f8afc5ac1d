"""Blob embeddings: normalized parameter encoding, Fourier features, and a
loadable fusion map that mixes per-token text embeddings with the shared
parameter features.

The fusion map is a plain MLP stored in a binary file:

    uint32  num_layers                      (little-endian)
    uint32  in_dim, out_dim  per layer      (little-endian)
    float32 weights row-major, then biases  per layer (little-endian)

The nonlinearity between consecutive layers is the exact Gaussian-error
form x * Phi(x) = 0.5 * x * (1 + erf(x / sqrt(2))), chosen over the tanh
approximation so independent implementations agree to 1e-5.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import InvalidArgumentError, ParseError
from .geometry import BlobParameter, Canvas

# Out-of-canvas centers are clamped to half a canvas beyond each edge so the
# Fourier encoding never sees unbounded coordinates.
_CENTER_CLAMP_LO = -0.5
_CENTER_CLAMP_HI = 1.5

_HEADER = struct.Struct("<I")
_DIMS = struct.Struct("<II")


@dataclass(frozen=True)
class FourierConfig:
    num_frequencies: int = 8
    base: float = 2.0
    scale: float = math.pi

    def __post_init__(self):
        if self.num_frequencies < 1:
            raise InvalidArgumentError(
                f"num_frequencies must be >= 1, got {self.num_frequencies}"
            )
        if not (math.isfinite(self.base) and self.base > 0):
            raise InvalidArgumentError(f"base must be positive, got {self.base}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise InvalidArgumentError(f"scale must be positive, got {self.scale}")

    @property
    def frequencies(self) -> np.ndarray:
        k = np.arange(self.num_frequencies, dtype=np.float64)
        return self.scale * self.base**k


class TokenEmbeddingMatrix:
    """L x d_s matrix of per-token text embeddings, ingested not computed."""

    def __init__(self, values: np.ndarray):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidArgumentError(
                f"token embeddings must be a non-empty 2-D matrix, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("token embeddings must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def num_tokens(self) -> int:
        return self._values.shape[0]

    @property
    def dim(self) -> int:
        return self._values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, TokenEmbeddingMatrix):
            return NotImplemented
        return self._values.shape == other._values.shape and bool(
            np.array_equal(self._values, other._values)
        )

    __hash__ = None


def _gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / math.sqrt(2.0)))


class FusionMap:
    """MLP applied row-wise to [token embedding ; parameter features]."""

    def __init__(self, layers):
        if not layers:
            raise InvalidArgumentError("fusion map needs at least one layer")
        checked = []
        prev_out = None
        for i, (w, b) in enumerate(layers):
            w = np.asarray(w, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64)
            if w.ndim != 2 or b.ndim != 1 or b.shape[0] != w.shape[1]:
                raise InvalidArgumentError(
                    f"layer {i}: weights must be 2-D with bias matching columns, "
                    f"got {w.shape} and {b.shape}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise InvalidArgumentError(f"layer {i}: parameters must be finite")
            if prev_out is not None and w.shape[0] != prev_out:
                raise InvalidArgumentError(
                    f"layer {i}: input dim {w.shape[0]} does not chain "
                    f"with previous output {prev_out}"
                )
            prev_out = w.shape[1]
            w = w.copy()
            b = b.copy()
            w.flags.writeable = False
            b.flags.writeable = False
            checked.append((w, b))
        self._layers = tuple(checked)

    @property
    def layers(self):
        return self._layers

    @property
    def input_dim(self) -> int:
        return self._layers[0][0].shape[0]

    @property
    def output_dim(self) -> int:
        return self._layers[-1][0].shape[1]

    @classmethod
    def identity(cls, dim: int) -> "FusionMap":
        return cls([(np.eye(dim), np.zeros(dim))])

    def apply(self, rows: np.ndarray) -> np.ndarray:
        x = np.asarray(rows, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise InvalidArgumentError(
                f"expected rows of width {self.input_dim}, got shape {x.shape}"
            )
        last = len(self._layers) - 1
        for i, (w, b) in enumerate(self._layers):
            x = x @ w + b
            if i != last:
                x = _gelu(x)
        return x

    def to_bytes(self) -> bytes:
        parts = [_HEADER.pack(len(self._layers))]
        for w, b in self._layers:
            parts.append(_DIMS.pack(w.shape[0], w.shape[1]))
        for w, b in self._layers:
            parts.append(np.ascontiguousarray(w, dtype="<f4").tobytes())
            parts.append(np.ascontiguousarray(b, dtype="<f4").tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "FusionMap":
        try:
            (num_layers,) = _HEADER.unpack_from(data, 0)
        except struct.error as exc:
            raise ParseError(f"truncated fusion-map header: {exc}") from exc
        if num_layers < 1:
            raise ParseError("fusion map must declare at least one layer")
        offset = _HEADER.size
        dims = []
        for _ in range(num_layers):
            try:
                dims.append(_DIMS.unpack_from(data, offset))
            except struct.error as exc:
                raise ParseError(f"truncated fusion-map dims: {exc}") from exc
            offset += _DIMS.size
        layers = []
        for in_dim, out_dim in dims:
            if in_dim < 1 or out_dim < 1:
                raise ParseError(f"invalid layer dims {in_dim}x{out_dim}")
            w_bytes = in_dim * out_dim * 4
            b_bytes = out_dim * 4
            if offset + w_bytes + b_bytes > len(data):
                raise ParseError("truncated fusion-map parameters")
            w = np.frombuffer(data, dtype="<f4", count=in_dim * out_dim, offset=offset)
            offset += w_bytes
            b = np.frombuffer(data, dtype="<f4", count=out_dim, offset=offset)
            offset += b_bytes
            layers.append((w.reshape(in_dim, out_dim).astype(np.float64), b.astype(np.float64)))
        if offset != len(data):
            raise ParseError(f"{len(data) - offset} trailing bytes after fusion map")
        return cls(layers)

    def save(self, path) -> None:
        with open(path, "wb") as f:
            f.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "FusionMap":
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())


def encode_parameter(p: BlobParameter, canvas: Canvas) -> np.ndarray:
    """[cx/W, cy/H, a/W, b/H, sin(theta), cos(theta)], centers clamped."""
    cx = min(max(p.cx / canvas.width, _CENTER_CLAMP_LO), _CENTER_CLAMP_HI)
    cy = min(max(p.cy / canvas.height, _CENTER_CLAMP_LO), _CENTER_CLAMP_HI)
    return np.array(
        [
            cx,
            cy,
            p.a / canvas.width,
            p.b / canvas.height,
            math.sin(p.theta),
            math.cos(p.theta),
        ],
        dtype=np.float64,
    )


def fourier_features(v: np.ndarray, config: FourierConfig) -> np.ndarray:
    """Per component x and frequency w: (sin(w*x), cos(w*x)), component-major."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise InvalidArgumentError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidArgumentError("input components must be finite")
    phases = v[:, None] * config.frequencies[None, :]  # (len(v), F)
    out = np.empty((v.shape[0], config.num_frequencies, 2), dtype=np.float64)
    out[:, :, 0] = np.sin(phases)
    out[:, :, 1] = np.cos(phases)
    return out.reshape(-1)


def blob_embedding(
    tokens: TokenEmbeddingMatrix,
    p: BlobParameter,
    canvas: Canvas,
    fourier: FourierConfig,
    fusion: FusionMap,
) -> np.ndarray:
    """Concat each token row with the shared parameter features, then fuse."""
    e_tau = fourier_features(encode_parameter(p, canvas), fourier)
    expected = tokens.dim + e_tau.shape[0]
    if fusion.input_dim != expected:
        raise InvalidArgumentError(
            f"fusion map expects input dim {fusion.input_dim}, "
            f"got {tokens.dim} token dims + {e_tau.shape[0]} parameter dims"
        )
    stacked = np.hstack([tokens.values, np.tile(e_tau, (tokens.num_tokens, 1))])
    return fusion.apply(stacked)
