/**
 * Degree/radian conversion at the display boundary.
 *
 * The wire format carries radians; people read and type degrees. All
 * conversions live here so no other module mixes units.
 */

export function degToRad(deg: number): number {
  return (deg * Math.PI) / 180;
}

export function radToDeg(rad: number): number {
  return (rad * 180) / Math.PI;
}

/** Fold degrees onto [0, 180): an ellipse is symmetric under a half turn. */
export function foldDegrees(deg: number): number {
  const folded = deg % 180;
  return folded < 0 ? folded + 180 : folded;
}

/** Rotation readout text, e.g. "96.0°". */
export function formatDegrees(rad: number): string {
  return `${foldDegrees(radToDeg(rad)).toFixed(1)}°`;
}
