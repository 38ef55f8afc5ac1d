"""Coarse grid-search oracle for the best ellipse IOU on a 200x100 rectangle.

Scans cx, cy in {256 +/- 8 step 4}, a in [80, 140] step 4, b in [40, 80]
step 4, theta in {0, 15, ..., 165} degrees and reports the best candidate.
The resulting IOU is frozen into the test suite; rerun this script to check
the frozen value.
"""
from __future__ import annotations

import math
import time

import numpy as np

from blobkit.geometry import BinaryMask, BlobParameter, Canvas, mask_iou, rasterize


def rectangle_mask(canvas: Canvas, cx: int, cy: int, w: int, h: int) -> BinaryMask:
    arr = np.zeros((canvas.height, canvas.width), dtype=bool)
    arr[cy - h // 2 : cy + h // 2, cx - w // 2 : cx + w // 2] = True
    return BinaryMask(arr)


def main() -> None:
    canvas = Canvas(512, 512)
    target = rectangle_mask(canvas, 256, 256, 200, 100)

    centers = [248, 252, 256, 260, 264]
    a_values = list(range(80, 141, 4))
    b_values = list(range(40, 81, 4))
    thetas = [math.radians(d) for d in range(0, 180, 15)]

    best = (-1.0, None)
    n = 0
    t0 = time.perf_counter()
    for cx in centers:
        for cy in centers:
            for a in a_values:
                for b in b_values:
                    for theta in thetas:
                        cand = BlobParameter(cx, cy, a, b, theta)
                        iou = mask_iou(rasterize(cand, canvas), target)
                        n += 1
                        if iou > best[0]:
                            best = (iou, cand)
    dt = time.perf_counter() - t0
    iou, cand = best
    print(f"evaluated {n} candidates in {dt:.1f}s")
    print(f"best IOU {iou:.6f}")
    print(
        f"best candidate cx={cand.cx} cy={cand.cy} a={cand.a} b={cand.b} "
        f"theta={math.degrees(cand.theta):.1f}deg"
    )


if __name__ == "__main__":
    main()
