/**
 * Pointer-gesture math for direct manipulation of ellipse blobs.
 *
 * A gesture previews locally while the pointer is down and yields one edit
 * operation on release (commit-on-release keeps the request rate bounded
 * and the revision sequence simple). Handle roles keep a >= b on screen:
 * the major handle only sets `a` (clamped to at least `b`), the minor
 * handle only sets `b` (clamped to at most `a`). All coordinates are
 * canvas pixels, origin top-left, y down.
 */

import type { BlobDoc, EditOp, LayoutDoc } from './protocol.js';

/** Which part of the selected ellipse the pointer grabbed. */
export type HandleKind = 'body' | 'major-axis' | 'minor-axis' | 'rotation';

export interface Point {
  x: number;
  y: number;
}

/** Smallest semi-axis anything may commit: half of the 1px minimum diameter. */
export const MIN_SEMI_AXIS = 0.5;

/** The rotation handle sits this far beyond the major tip, in canvas pixels. */
export const ROTATION_HANDLE_OFFSET = 24;

/** Pointer-to-handle distance that counts as grabbing it, in canvas pixels. */
export const HANDLE_HIT_RADIUS = 10;

export interface GestureState {
  readonly kind: HandleKind;
  readonly blobIndex: number;
  /** Blob parameters as they were on pointer-down. */
  readonly start: BlobDoc;
  /** Pointer-down position. */
  readonly origin: Point;
  /** Live preview parameters, shown until release. */
  readonly preview: BlobDoc;
}

export function beginGesture(
  kind: HandleKind,
  blobIndex: number,
  blob: BlobDoc,
  pointer: Point,
): GestureState {
  return {
    kind,
    blobIndex,
    start: { ...blob },
    origin: { ...pointer },
    preview: { ...blob },
  };
}

/** Signed length of (pointer - center) along the axis at theta + offset. */
function projectOnAxis(blob: BlobDoc, pointer: Point, axisOffset: number): number {
  const angle = blob.theta_rad + axisOffset;
  const dx = pointer.x - blob.cx;
  const dy = pointer.y - blob.cy;
  return dx * Math.cos(angle) + dy * Math.sin(angle);
}

export function updateGesture(state: GestureState, pointer: Point): GestureState {
  const { kind, start, origin } = state;
  const preview: BlobDoc = { ...start };
  switch (kind) {
    case 'body':
      preview.cx = start.cx + (pointer.x - origin.x);
      preview.cy = start.cy + (pointer.y - origin.y);
      break;
    case 'major-axis':
      // The major handle may not cross under b; that would swap the roles.
      preview.a = Math.max(Math.abs(projectOnAxis(start, pointer, 0)), start.b);
      break;
    case 'minor-axis':
      // The minor handle may shrink freely (commit guards the 1px floor).
      preview.b = Math.min(Math.abs(projectOnAxis(start, pointer, Math.PI / 2)), start.a);
      break;
    case 'rotation':
      preview.theta_rad = Math.atan2(pointer.y - start.cy, pointer.x - start.cx);
      break;
  }
  return { ...state, preview };
}

/** The edit operation a released gesture commits, or null if nothing moved. */
export function endGesture(state: GestureState): EditOp | null {
  const { kind, blobIndex: index, start, preview } = state;
  switch (kind) {
    case 'body':
      if (preview.cx === start.cx && preview.cy === start.cy) {
        return null;
      }
      return { op: 'move', index, cx: preview.cx, cy: preview.cy };
    case 'major-axis':
    case 'minor-axis':
      if (preview.a === start.a && preview.b === start.b) {
        return null;
      }
      return { op: 'resize', index, a: preview.a, b: preview.b };
    case 'rotation':
      if (preview.theta_rad === start.theta_rad) {
        return null;
      }
      return { op: 'rotate', index, theta_rad: preview.theta_rad };
  }
}

/** Canvas position of a named handle on the given blob. */
export function handlePosition(blob: BlobDoc, kind: Exclude<HandleKind, 'body'>): Point {
  const cos = Math.cos(blob.theta_rad);
  const sin = Math.sin(blob.theta_rad);
  switch (kind) {
    case 'major-axis':
      return { x: blob.cx + blob.a * cos, y: blob.cy + blob.a * sin };
    case 'minor-axis':
      // Minor axis points 90° past the major one; at theta 0 that is +y.
      return { x: blob.cx - blob.b * sin, y: blob.cy + blob.b * cos };
    case 'rotation': {
      const r = blob.a + ROTATION_HANDLE_OFFSET;
      return { x: blob.cx + r * cos, y: blob.cy + r * sin };
    }
  }
}

/** True when the point lies inside the ellipse. */
export function containsPoint(blob: BlobDoc, point: Point): boolean {
  const cos = Math.cos(blob.theta_rad);
  const sin = Math.sin(blob.theta_rad);
  const dx = point.x - blob.cx;
  const dy = point.y - blob.cy;
  const u = dx * cos + dy * sin;
  const v = -dx * sin + dy * cos;
  if (blob.a <= 0 || blob.b <= 0) {
    return false;
  }
  return (u / blob.a) ** 2 + (v / blob.b) ** 2 <= 1;
}

export interface HitResult {
  blobIndex: number;
  kind: HandleKind;
}

function distance(p: Point, q: Point): number {
  return Math.hypot(p.x - q.x, p.y - q.y);
}

/**
 * What a pointer-down at `point` grabs: the selected blob's handles take
 * priority, then blob bodies topmost (last-drawn) first.
 */
export function hitTest(layout: LayoutDoc, point: Point, selection: number | null): HitResult | null {
  if (selection !== null && selection >= 0 && selection < layout.blobs.length) {
    const blob = layout.blobs[selection];
    const handles: Array<Exclude<HandleKind, 'body'>> = ['rotation', 'major-axis', 'minor-axis'];
    for (const kind of handles) {
      if (distance(point, handlePosition(blob, kind)) <= HANDLE_HIT_RADIUS) {
        return { blobIndex: selection, kind };
      }
    }
  }
  for (let i = layout.blobs.length - 1; i >= 0; i--) {
    if (containsPoint(layout.blobs[i], point)) {
      return { blobIndex: i, kind: 'body' };
    }
  }
  return null;
}
