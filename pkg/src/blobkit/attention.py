"""Masked cross-attention over blob tokens, with a standard baseline.

Queries are feature-grid rows; keys/values come from per-blob token
matrices concatenated along the sequence axis. Each blob carries a bit
mask over the h*w grid locations; at location j, tokens of a blob with
mask bit 0 get a -inf logit. Softmax normalization subtracts the per-row
maximum over FINITE logits only, so masked entries cannot poison the row.
A location masked out by every blob yields an all-zero output row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .geometry import BinaryMask


def _check_matrix(name: str, arr: np.ndarray, ndim: int = 2) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    if out.ndim != ndim:
        raise InvalidArgumentError(f"{name} must be {ndim}-D, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise InvalidArgumentError(f"{name} must be finite")
    return out


class FeatureGrid:
    """h*w query rows of width d, row-major over the h x w plane."""

    def __init__(self, h: int, w: int, values: np.ndarray):
        if h < 1 or w < 1:
            raise InvalidArgumentError(f"grid dims must be >= 1, got {h}x{w}")
        vals = _check_matrix("feature grid", values)
        if vals.shape[0] != h * w:
            raise InvalidArgumentError(
                f"expected {h * w} rows for a {h}x{w} grid, got {vals.shape[0]}"
            )
        self.h = h
        self.w = w
        vals = vals.copy()
        vals.flags.writeable = False
        self.values = vals

    @property
    def d(self) -> int:
        return self.values.shape[1]


class BlobTokens:
    """Per-blob keys/values (L x d_g) plus a location mask of length h*w."""

    def __init__(self, keys: np.ndarray, values_mat: np.ndarray, mask: np.ndarray):
        k = _check_matrix("keys", keys)
        v = _check_matrix("values", values_mat)
        if k.shape != v.shape:
            raise InvalidArgumentError(
                f"keys {k.shape} and values {v.shape} must share shape"
            )
        m = np.asarray(mask)
        if m.ndim != 1:
            raise InvalidArgumentError(f"mask must be 1-D, got shape {m.shape}")
        m = m.astype(bool)
        if k.shape[0] < 1:
            raise InvalidArgumentError("blob must carry at least one token")
        for arr in (k, v, m):
            arr.flags.writeable = False
        self.keys = k
        self.values_mat = v
        self.mask = m

    @property
    def num_tokens(self) -> int:
        return self.keys.shape[0]


@dataclass(frozen=True)
class ProjectionSet:
    """Wq for queries plus key/value maps, shared or one pair per blob."""

    wq: np.ndarray
    wk: tuple
    wv: tuple
    shared: bool

    @classmethod
    def shared_maps(cls, wq, wk, wv) -> "ProjectionSet":
        return cls(
            wq=_check_matrix("Wq", wq),
            wk=(_check_matrix("Wk", wk),),
            wv=(_check_matrix("Wv", wv),),
            shared=True,
        )

    @classmethod
    def per_blob_maps(cls, wq, wk_list, wv_list) -> "ProjectionSet":
        if len(wk_list) != len(wv_list) or not wk_list:
            raise InvalidArgumentError("need matching non-empty Wk/Wv lists")
        return cls(
            wq=_check_matrix("Wq", wq),
            wk=tuple(_check_matrix(f"Wk[{i}]", m) for i, m in enumerate(wk_list)),
            wv=tuple(_check_matrix(f"Wv[{i}]", m) for i, m in enumerate(wv_list)),
            shared=False,
        )

    def key_map(self, blob_index: int) -> np.ndarray:
        return self.wk[0] if self.shared else self.wk[blob_index]

    def value_map(self, blob_index: int) -> np.ndarray:
        return self.wv[0] if self.shared else self.wv[blob_index]


def downsample_mask(ellipse_mask: BinaryMask, h: int, w: int) -> np.ndarray:
    """Any-coverage max-pool onto an h x w grid, flattened row-major.

    Cell (r, c) covers source rows floor(r*H/h) .. floor((r+1)*H/h)-1 and
    the analogous columns. The cell holding the foreground centroid is
    forced to 1 whenever the source is non-empty, so a blob smaller than
    one cell still claims a location.
    """
    if h < 1 or w < 1:
        raise InvalidArgumentError(f"grid dims must be >= 1, got {h}x{w}")
    src = ellipse_mask.array
    big_h, big_w = src.shape
    if h > big_h or w > big_w:
        raise InvalidArgumentError(
            f"cannot downsample {big_w}x{big_h} mask onto a finer {w}x{h} grid"
        )
    row_edges = [(r * big_h) // h for r in range(h + 1)]
    col_edges = [(c * big_w) // w for c in range(w + 1)]
    out = np.zeros((h, w), dtype=bool)
    for r in range(h):
        band = src[row_edges[r] : row_edges[r + 1]]
        if not band.any():
            continue
        for c in range(w):
            out[r, c] = band[:, col_edges[c] : col_edges[c + 1]].any()
    ys, xs = np.nonzero(src)
    if xs.size:
        cy = float(ys.mean()) + 0.5
        cx = float(xs.mean()) + 0.5
        r = min(int(cy * h / big_h), h - 1)
        c = min(int(cx * w / big_w), w - 1)
        out[r, c] = True
    return out.reshape(-1)


def _validate_blobs(g: FeatureGrid, blobs, need_masks: bool):
    if not blobs:
        raise InvalidArgumentError("need at least one blob")
    hw = g.h * g.w
    for i, blob in enumerate(blobs):
        if blob.keys.shape[1] != g.d:
            raise InvalidArgumentError(
                f"blob {i}: key width {blob.keys.shape[1]} != grid width {g.d}"
            )
        if need_masks and blob.mask.shape[0] != hw:
            raise InvalidArgumentError(
                f"blob {i}: mask length {blob.mask.shape[0]} != {hw} locations"
            )


def _attention(g: FeatureGrid, blobs, masked: bool):
    _validate_blobs(g, blobs, need_masks=masked)
    keys = np.vstack([b.keys for b in blobs])
    values = np.vstack([b.values_mat for b in blobs])
    logits = (g.values @ keys.T) / math.sqrt(g.d)

    if masked:
        allowed = np.hstack(
            [np.repeat(b.mask[:, None], b.num_tokens, axis=1) for b in blobs]
        )
        logits = np.where(allowed, logits, -np.inf)
        any_allowed = allowed.any(axis=1)
        # row max over finite entries only; fully masked rows get 0 weights
        row_max = np.where(any_allowed, logits.max(axis=1), 0.0)
        expd = np.where(allowed, np.exp(logits - row_max[:, None]), 0.0)
    else:
        row_max = logits.max(axis=1)
        expd = np.exp(logits - row_max[:, None])
        any_allowed = np.ones(logits.shape[0], dtype=bool)

    denom = expd.sum(axis=1)
    weights = np.zeros_like(expd)
    live = denom > 0
    weights[live] = expd[live] / denom[live, None]
    return weights @ values, weights


def standard_cross_attention(
    g: FeatureGrid, blobs, return_weights: bool = False
) -> np.ndarray:
    out, weights = _attention(g, blobs, masked=False)
    return (out, weights) if return_weights else out


def masked_cross_attention(
    g: FeatureGrid, blobs, return_weights: bool = False
) -> np.ndarray:
    out, weights = _attention(g, blobs, masked=True)
    return (out, weights) if return_weights else out


def project(e_b: np.ndarray, g_raw: np.ndarray, proj: ProjectionSet, blob_index: int = 0):
    """q = g_raw @ Wq; k, v = e_b @ Wk, e_b @ Wv for the chosen blob. No biases."""
    e = _check_matrix("blob embedding", e_b)
    g = _check_matrix("raw features", g_raw)
    if g.shape[1] != proj.wq.shape[0]:
        raise InvalidArgumentError(
            f"feature width {g.shape[1]} != Wq rows {proj.wq.shape[0]}"
        )
    wk = proj.key_map(blob_index)
    wv = proj.value_map(blob_index)
    if e.shape[1] != wk.shape[0] or e.shape[1] != wv.shape[0]:
        raise InvalidArgumentError(
            f"embedding width {e.shape[1]} != Wk/Wv rows {wk.shape[0]}/{wv.shape[0]}"
        )
    return g @ proj.wq, e @ wk, e @ wv


def gated_residual(x: np.ndarray, delta: np.ndarray, gate: float) -> np.ndarray:
    """x + tanh(gate) * delta."""
    xa = _check_matrix("x", x)
    da = _check_matrix("delta", delta)
    if xa.shape != da.shape:
        raise InvalidArgumentError(f"shape mismatch {xa.shape} vs {da.shape}")
    if not math.isfinite(gate):
        raise InvalidArgumentError(f"gate must be finite, got {gate}")
    return xa + math.tanh(gate) * da
