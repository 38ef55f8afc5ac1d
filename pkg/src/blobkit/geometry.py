"""Ellipse-blob geometry: parameters, rasterization, IOU, layout edits.

Coordinate convention: origin at the top-left of the canvas, x rightward,
y downward; pixel (i, j) has center (i + 0.5, j + 0.5). A blob parameter is
the five-vector (cx, cy, a, b, theta) with a the semi-major and b the
semi-minor radius and theta the orientation in radians, kept in (-pi, pi].

All values here are immutable after construction and every operation is a
pure function, so everything is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError

DEFAULT_CANVAS_SIZE = 512
DEFAULT_MAX_BLOBS = 15

_TWO_PI = 2.0 * math.pi


def canonicalize_angle(theta: float) -> float:
    """Reduce an angle to the canonical range (-pi, pi].

    The result is congruent to ``theta`` modulo 2*pi; IEEE remainder makes
    the reduction itself exact.
    """
    if not math.isfinite(theta):
        raise InvalidArgumentError(f"angle must be finite, got {theta!r}")
    t = math.remainder(theta, _TWO_PI)
    if t <= -math.pi:
        t += _TWO_PI
    return t


def _unit_axes(theta: float) -> tuple[float, float]:
    """(cos, sin) of the orientation, folded to the pi-periodic representative.

    The ellipse is invariant under theta -> theta + pi; folding through
    math.remainder (an exact operation) before the trig calls makes
    rasterization and containment agree bit-for-bit across that symmetry.
    """
    t = math.remainder(theta, math.pi)
    return math.cos(t), math.sin(t)


@dataclass(frozen=True)
class Canvas:
    """Pixel canvas, width x height, both at least 1."""

    width: int = DEFAULT_CANVAS_SIZE
    height: int = DEFAULT_CANVAS_SIZE

    def __post_init__(self):
        if not (isinstance(self.width, int) and isinstance(self.height, int)):
            raise InvalidArgumentError("canvas dimensions must be integers")
        if self.width < 1 or self.height < 1:
            raise InvalidArgumentError(
                f"canvas must be at least 1x1, got {self.width}x{self.height}"
            )


@dataclass(frozen=True)
class BlobParameter:
    """Tilted ellipse (cx, cy, a, b, theta).

    The constructor normalizes: if a < b the axes are swapped and theta is
    rotated by pi/2 (same ellipse, canonical labeling), and theta is reduced
    to (-pi, pi]. Centers may lie outside the canvas; rasterization clips.
    """

    cx: float
    cy: float
    a: float
    b: float
    theta: float = 0.0

    def __post_init__(self):
        cx, cy, a, b, theta = (
            float(self.cx), float(self.cy), float(self.a), float(self.b), float(self.theta)
        )
        for name, v in (("cx", cx), ("cy", cy), ("a", a), ("b", b), ("theta", theta)):
            if not math.isfinite(v):
                raise InvalidArgumentError(f"{name} must be finite, got {v!r}")
        if a <= 0 or b <= 0:
            raise InvalidArgumentError(f"radii must be positive, got a={a}, b={b}")
        if a < b:
            a, b = b, a
            theta = theta + math.pi / 2.0
        object.__setattr__(self, "cx", cx)
        object.__setattr__(self, "cy", cy)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "theta", canonicalize_angle(theta))

    def bounding_box(self) -> tuple[float, float, float, float]:
        """Tight axis-aligned bounds (x_min, y_min, x_max, y_max)."""
        c, s = _unit_axes(self.theta)
        ex = math.sqrt((self.a * c) ** 2 + (self.b * s) ** 2)
        ey = math.sqrt((self.a * s) ** 2 + (self.b * c) ** 2)
        return self.cx - ex, self.cy - ey, self.cx + ex, self.cy + ey

    def extends_beyond(self, canvas: Canvas) -> bool:
        """True if any part of the ellipse lies outside the canvas."""
        x0, y0, x1, y1 = self.bounding_box()
        return x0 < 0 or y0 < 0 or x1 > canvas.width or y1 > canvas.height


@dataclass(frozen=True)
class Blob:
    """One object: ellipse parameter plus a free-text appearance sentence."""

    parameter: BlobParameter
    description: str
    category: str

    def __post_init__(self):
        if not self.description:
            raise InvalidArgumentError("blob description must be non-empty")
        if not self.category:
            raise InvalidArgumentError("blob category must be non-empty")
        if any(ch in self.category for ch in "{}\n"):
            raise InvalidArgumentError(
                f"category may not contain braces or newlines: {self.category!r}"
            )


@dataclass(frozen=True)
class BlobLayout:
    """Ordered blobs on one canvas with an optional global caption.

    Order matters only for serialization; geometry and attention semantics
    are order-independent. The blob-count cap (default 15) is enforced at the
    construction surfaces: edits, parsers, and the service.
    """

    canvas: Canvas
    blobs: tuple[Blob, ...] = ()
    global_caption: str = ""

    def __post_init__(self):
        object.__setattr__(self, "blobs", tuple(self.blobs))


class BinaryMask:
    """2-D foreground/background raster backed by a read-only bool array."""

    __slots__ = ("_array",)

    def __init__(self, array: np.ndarray):
        arr = np.ascontiguousarray(array, dtype=bool)
        if arr.ndim != 2:
            raise InvalidArgumentError(f"mask must be 2-D, got shape {arr.shape}")
        arr.flags.writeable = False
        self._array = arr

    @classmethod
    def zeros(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def from_bits(cls, width: int, height: int, bits) -> "BinaryMask":
        """Build from a row-major flat 0/1 sequence of length width*height."""
        flat = np.asarray(bits)
        if flat.size != width * height:
            raise InvalidArgumentError(
                f"expected {width * height} bits for {width}x{height}, got {flat.size}"
            )
        return cls(flat.reshape(height, width).astype(bool))

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def width(self) -> int:
        return self._array.shape[1]

    @property
    def height(self) -> int:
        return self._array.shape[0]

    @property
    def bits(self) -> np.ndarray:
        """Row-major flat view, one bool per pixel."""
        return self._array.reshape(-1)

    def foreground_count(self) -> int:
        return int(np.count_nonzero(self._array))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self._array.shape == other._array.shape and bool(
            np.array_equal(self._array, other._array)
        )

    def __hash__(self):
        raise TypeError("BinaryMask is not hashable")

    def __repr__(self):
        return f"BinaryMask({self.width}x{self.height}, fg={self.foreground_count()})"


def contains_point(p: BlobParameter, x: float, y: float) -> bool:
    """True iff (x, y) lies inside or on the ellipse boundary."""
    c, s = _unit_axes(p.theta)
    dx = x - p.cx
    dy = y - p.cy
    u = dx * c + dy * s
    v = -dx * s + dy * c
    return (u / p.a) ** 2 + (v / p.b) ** 2 <= 1.0


def rasterize(p: BlobParameter, canvas: Canvas) -> BinaryMask:
    """Pixel-center sampled ellipse mask, clipped to the canvas.

    bit(i, j) = 1 iff the pixel center (i + 0.5, j + 0.5) satisfies the
    closed ellipse inequality. Only the ellipse's bounding box is evaluated.
    """
    w, h = canvas.width, canvas.height
    x0, y0, x1, y1 = p.bounding_box()
    # One pixel of slack; the exact predicate filters the edges.
    i_lo = max(0, int(math.floor(x0 - 0.5)) - 1)
    i_hi = min(w - 1, int(math.ceil(x1 + 0.5)) + 1)
    j_lo = max(0, int(math.floor(y0 - 0.5)) - 1)
    j_hi = min(h - 1, int(math.ceil(y1 + 0.5)) + 1)
    out = np.zeros((h, w), dtype=bool)
    if i_lo > i_hi or j_lo > j_hi:
        return BinaryMask(out)

    c, s = _unit_axes(p.theta)
    xs = np.arange(i_lo, i_hi + 1, dtype=np.float64) + 0.5 - p.cx
    ys = np.arange(j_lo, j_hi + 1, dtype=np.float64) + 0.5 - p.cy
    dx = xs[np.newaxis, :]
    dy = ys[:, np.newaxis]
    u = dx * c + dy * s
    v = -dx * s + dy * c
    out[j_lo : j_hi + 1, i_lo : i_hi + 1] = (u / p.a) ** 2 + (v / p.b) ** 2 <= 1.0
    return BinaryMask(out)


def mask_iou(m1: BinaryMask, m2: BinaryMask) -> float:
    """Intersection over union by exact pixel counting."""
    if (m1.width, m1.height) != (m2.width, m2.height):
        raise InvalidArgumentError(
            f"mask shapes differ: {m1.width}x{m1.height} vs {m2.width}x{m2.height}"
        )
    inter = int(np.count_nonzero(m1.array & m2.array))
    union = m1.foreground_count() + m2.foreground_count() - inter
    if union == 0:
        raise DegenerateInputError("IOU of two empty masks is undefined")
    return inter / union


def ellipse_iou(p1: BlobParameter, p2: BlobParameter, canvas: Canvas) -> float:
    """Rasterized IOU of two ellipses on the same canvas."""
    return mask_iou(rasterize(p1, canvas), rasterize(p2, canvas))


# ---------------------------------------------------------------------------
# Layout edits
# ---------------------------------------------------------------------------
# Each edit returns a new layout; untouched blobs are carried over unchanged
# (same objects, so field-by-field equality is trivially preserved).


@dataclass(frozen=True)
class MoveBlob:
    index: int
    cx: float
    cy: float


@dataclass(frozen=True)
class RotateBlob:
    index: int
    theta: float


@dataclass(frozen=True)
class ResizeBlob:
    index: int
    a: float
    b: float


@dataclass(frozen=True)
class SetDescription:
    index: int
    text: str


@dataclass(frozen=True)
class AddBlob:
    blob: Blob


@dataclass(frozen=True)
class RemoveBlob:
    index: int


Edit = MoveBlob | RotateBlob | ResizeBlob | SetDescription | AddBlob | RemoveBlob


def _checked_index(layout: BlobLayout, index: int) -> int:
    if not (0 <= index < len(layout.blobs)):
        raise IndexError(f"blob index {index} out of range [0, {len(layout.blobs)})")
    return index


def edit_layout(layout: BlobLayout, edit: Edit, max_blobs: int = DEFAULT_MAX_BLOBS) -> BlobLayout:
    """Apply one edit, returning a new layout; the input is never mutated."""
    blobs = list(layout.blobs)
    match edit:
        case MoveBlob(index=i, cx=cx, cy=cy):
            i = _checked_index(layout, i)
            blob = blobs[i]
            blobs[i] = replace(blob, parameter=replace(blob.parameter, cx=float(cx), cy=float(cy)))
        case RotateBlob(index=i, theta=theta):
            i = _checked_index(layout, i)
            blob = blobs[i]
            blobs[i] = replace(blob, parameter=replace(blob.parameter, theta=float(theta)))
        case ResizeBlob(index=i, a=a, b=b):
            i = _checked_index(layout, i)
            blob = blobs[i]
            blobs[i] = replace(blob, parameter=replace(blob.parameter, a=float(a), b=float(b)))
        case SetDescription(index=i, text=text):
            i = _checked_index(layout, i)
            blobs[i] = replace(blobs[i], description=text)
        case AddBlob(blob=blob):
            if len(blobs) >= max_blobs:
                raise InvalidArgumentError(f"layout already holds the maximum of {max_blobs} blobs")
            blobs.append(blob)
        case RemoveBlob(index=i):
            i = _checked_index(layout, i)
            del blobs[i]
        case _:
            raise InvalidArgumentError(f"unknown edit {edit!r}")
    return replace(layout, blobs=tuple(blobs))
