"""Fit an ellipse to a binary segmentation mask by maximizing rasterized IOU.

Initialization comes from the foreground's second moments (a uniform ellipse
with semi-axes a, b has central second moments a^2/4 and b^2/4, so doubling
the eigenvalue square roots inverts exactly). Refinement is a fixed,
dependency-free Nelder-Mead over (cx, cy, a, b, theta): the objective is
piecewise constant in pixels, so derivative-free search is the right tool.
Identical mask and config always produce a bit-identical result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError
from .geometry import BinaryMask, BlobParameter, Canvas, rasterize

# Fixed Nelder-Mead coefficients (reflection, expansion, contraction, shrink).
_ALPHA = 1.0
_GAMMA = 2.0
_RHO = 0.5
_SIGMA = 0.5

# Initial simplex: each vertex perturbs one coordinate by +10% of its
# magnitude, with floors of 2px for positions/radii and 0.05 rad for angle.
_MIN_STEP_PX = 2.0
_MIN_STEP_RAD = 0.05

_MIN_FOREGROUND = 5  # five degrees of freedom need at least five pixels
_COLLINEAR_EPS = 1e-9


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 200
    iou_tolerance: float = 1e-3
    raster_scale: float = 1.0
    refine: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidArgumentError(
                f"max_iterations must be >= 1, got {self.max_iterations}"
            )
        if not (0.0 < self.raster_scale <= 1.0):
            raise InvalidArgumentError(
                f"raster_scale must be in (0, 1], got {self.raster_scale}"
            )
        if self.iou_tolerance < 0.0:
            raise InvalidArgumentError(
                f"iou_tolerance must be >= 0, got {self.iou_tolerance}"
            )


@dataclass(frozen=True)
class FitResult:
    parameter: BlobParameter
    iou: float
    iterations_used: int
    initial_iou: float


def moment_init(mask: BinaryMask) -> BlobParameter:
    """Ellipse matching the foreground's centroid and second moments."""
    ys, xs = np.nonzero(mask.array)
    if xs.size < _MIN_FOREGROUND:
        raise DegenerateInputError(
            f"need at least {_MIN_FOREGROUND} foreground pixels, got {xs.size}"
        )
    px = xs.astype(np.float64) + 0.5
    py = ys.astype(np.float64) + 0.5
    cx = float(px.mean())
    cy = float(py.mean())
    cov = np.cov(px, py, ddof=0)
    eigvals, eigvecs = np.linalg.eigh(cov)
    lam_minor, lam_major = float(eigvals[0]), float(eigvals[1])
    if lam_minor < _COLLINEAR_EPS:
        raise DegenerateInputError("foreground pixels are collinear; no ellipse orientation")
    theta = math.atan2(float(eigvecs[1, 1]), float(eigvecs[0, 1]))
    return BlobParameter(cx, cy, 2.0 * math.sqrt(lam_major), 2.0 * math.sqrt(lam_minor), theta)


def _scaled_target(mask: BinaryMask, scale: float) -> tuple[np.ndarray, Canvas]:
    """Nearest-neighbor downsample of the target for cheaper objectives."""
    if scale == 1.0:
        return mask.array, Canvas(mask.width, mask.height)
    w = max(1, int(round(mask.width * scale)))
    h = max(1, int(round(mask.height * scale)))
    src_x = np.minimum(((np.arange(w) + 0.5) / scale).astype(np.int64), mask.width - 1)
    src_y = np.minimum(((np.arange(h) + 0.5) / scale).astype(np.int64), mask.height - 1)
    return mask.array[np.ix_(src_y, src_x)], Canvas(w, h)


def _iou_against(target: np.ndarray, target_count: int, p: BlobParameter, canvas: Canvas) -> float:
    cand = rasterize(p, canvas).array
    inter = int(np.count_nonzero(cand & target))
    union = target_count + int(np.count_nonzero(cand)) - inter
    return inter / union if union else 0.0


def _make_objective(mask: BinaryMask, scale: float):
    target, canvas = _scaled_target(mask, scale)
    target_count = int(np.count_nonzero(target))

    def objective(vec: np.ndarray) -> float:
        cx, cy, a, b, theta = (float(v) for v in vec)
        if not all(math.isfinite(v) for v in (cx, cy, a, b, theta)) or a <= 0.0 or b <= 0.0:
            return -1.0
        p = BlobParameter(cx * scale, cy * scale, a * scale, b * scale, theta)
        return _iou_against(target, target_count, p, canvas)

    return objective


def _initial_simplex(x0: np.ndarray) -> np.ndarray:
    simplex = np.tile(x0, (6, 1))
    for i in range(5):
        floor = _MIN_STEP_RAD if i == 4 else _MIN_STEP_PX
        simplex[i + 1, i] += max(0.1 * abs(x0[i]), floor)
    return simplex


def fit_ellipse(mask: BinaryMask, config: FitConfig = FitConfig()) -> FitResult:
    """Moment initialization followed by Nelder-Mead IOU maximization.

    Returns the best candidate ever evaluated; the reported IOU is always
    measured at full mask resolution even when the search objective ran at
    a reduced raster_scale, and it never falls below the initial IOU.
    """
    init = moment_init(mask)
    canvas = Canvas(mask.width, mask.height)
    target = mask.array
    target_count = mask.foreground_count()
    initial_iou = _iou_against(target, target_count, init, canvas)
    if not config.refine:
        return FitResult(init, initial_iou, 0, initial_iou)

    objective = _make_objective(mask, config.raster_scale)
    x0 = np.array([init.cx, init.cy, init.a, init.b, init.theta], dtype=np.float64)
    simplex = _initial_simplex(x0)
    fvals = np.array([objective(v) for v in simplex])

    best_vec = simplex[0].copy()
    best_val = fvals[0]
    for vec, val in zip(simplex[1:], fvals[1:]):
        if val > best_val:  # strict: ties keep the earliest evaluated
            best_val, best_vec = val, vec.copy()

    def consider(vec: np.ndarray, val: float):
        nonlocal best_val, best_vec
        if val > best_val:
            best_val, best_vec = val, vec.copy()

    iterations = 0
    while iterations < config.max_iterations:
        order = np.argsort(-fvals, kind="stable")
        simplex = simplex[order]
        fvals = fvals[order]
        if fvals[0] - fvals[-1] < config.iou_tolerance:
            break
        iterations += 1

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + _ALPHA * (centroid - worst)
        fr = objective(xr)
        consider(xr, fr)

        if fr > fvals[0]:
            xe = centroid + _GAMMA * (centroid - worst)
            fe = objective(xe)
            consider(xe, fe)
            if fe > fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
        elif fr > fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            if fr > fvals[-1]:
                xc = centroid + _RHO * (xr - centroid)
                fc = objective(xc)
                consider(xc, fc)
                accept = fc >= fr
            else:
                xc = centroid - _RHO * (centroid - worst)
                fc = objective(xc)
                consider(xc, fc)
                accept = fc > fvals[-1]
            if accept:
                simplex[-1], fvals[-1] = xc, fc
            else:
                for i in range(1, 6):
                    simplex[i] = simplex[0] + _SIGMA * (simplex[i] - simplex[0])
                    fvals[i] = objective(simplex[i])
                    consider(simplex[i], fvals[i])

    cx, cy, a, b, theta = (float(v) for v in best_vec)
    if a <= 0.0 or b <= 0.0:
        return FitResult(init, initial_iou, iterations, initial_iou)
    refined = BlobParameter(cx, cy, a, b, theta)
    refined_iou = _iou_against(target, target_count, refined, canvas)
    if refined_iou < initial_iou:
        # Possible only when the search ran at reduced resolution.
        return FitResult(init, initial_iou, iterations, initial_iou)
    return FitResult(refined, refined_iou, iterations, initial_iou)
