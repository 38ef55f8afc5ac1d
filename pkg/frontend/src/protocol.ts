/**
 * Wire types for the layout service JSON API.
 *
 * Field names and units match the server documents exactly. Angles travel
 * as radians (`theta_rad`); the UI converts to degrees only at the display
 * boundary. `a` is the semi-major and `b` the semi-minor axis in pixels;
 * the server normalizes swapped axes itself. Canvas origin is top-left
 * with y growing downward.
 */

export interface CanvasDoc {
  w: number;
  h: number;
}

export interface BlobDoc {
  category: string;
  cx: number;
  cy: number;
  a: number;
  b: number;
  theta_rad: number;
  description: string;
}

export interface LayoutDoc {
  canvas: CanvasDoc;
  caption: string;
  blobs: BlobDoc[];
}

/** A stored layout: what POST /layouts and every mutation return. */
export interface RecordDoc {
  id: string;
  revision: number;
  created_at: string;
  updated_at: string;
  layout: LayoutDoc;
}

/** One mutation of a stored layout; exactly one operation per request. */
export type EditOp =
  | { op: 'move'; index: number; cx: number; cy: number }
  | { op: 'rotate'; index: number; theta_rad: number }
  | { op: 'resize'; index: number; a: number; b: number }
  | { op: 'set_description'; index: number; description: string }
  | { op: 'add'; blob: BlobDoc }
  | { op: 'remove'; index: number };

/** POST /diagnostics response; all values are server-computed. */
export interface DiagnosticsDoc {
  pairwise_ious: number[][];
  out_of_canvas: boolean[];
  coverage: number;
  empty_masks: number[];
}

/**
 * One run-length-encoded mask: alternating run lengths over the row-major
 * flattened bitmap, starting with a background run (possibly zero-length).
 * Runs sum to width*height.
 */
export interface MaskDoc {
  index: number;
  category: string;
  foreground: number;
  rle: number[];
}

export interface RasterizeDoc {
  width: number;
  height: number;
  masks: MaskDoc[];
}

/** POST /attention-mask response: h*w bits, row-major. */
export interface AttentionMaskDoc {
  h: number;
  w: number;
  bits: number[];
}

export interface CaseResultDoc {
  case_id: string;
  accurate: boolean;
  detail: string;
  precision: number | null;
  recall: number | null;
}

export interface MetricsReportDoc {
  n_cases: number;
  accuracy: number;
  mean_precision: number | null;
  mean_recall: number | null;
  per_case: CaseResultDoc[];
}

export type SpatialRelation = 'left-of' | 'right-of' | 'above' | 'below';

/** Benchmark spec for one spatial-relation check. */
export interface SpatialSpecDoc {
  subject: string;
  relation: SpatialRelation;
  object: string;
}

export interface RejectDoc {
  line_number: number;
  text: string;
  reason: string;
}

/** POST /import response: the created record plus per-line parse notes. */
export interface ImportResultDoc extends RecordDoc {
  rejects: RejectDoc[];
  warnings: string[];
}

export type PromptKind = 'parameter' | 'description';

/** A prompt demonstration payload: raw text, a layout, or description lines. */
export type DemoPayload = string | LayoutDoc | Array<{ category: string; sentence: string }>;

export interface PromptResultDoc {
  kind: PromptKind;
  text: string;
}

/** An empty layout document on the given canvas. */
export function emptyLayout(canvas: CanvasDoc, caption: string): LayoutDoc {
  return { canvas: { ...canvas }, caption, blobs: [] };
}
