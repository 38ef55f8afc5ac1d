/**
 * Client-side editing session over one stored layout.
 *
 * The session mirrors the server's revision number and never lets two of
 * its own mutations race: while a save is in flight further commits queue
 * and are sent one at a time, each carrying the revision returned by its
 * predecessor, so two rapid edits serialize instead of producing a 409.
 * A 409 still means some other client moved the record; the session then
 * freezes into a conflict state until reload() fetches the current truth.
 * A 422 surfaces as an inline field message and leaves the layout as the
 * server kept it. Gestures preview locally and commit on release.
 */

import { InvariantError, StaleRevisionError } from './api.js';
import type { BlobDoc, CanvasDoc, EditOp, LayoutDoc, RecordDoc } from './protocol.js';
import {
  GestureState,
  HandleKind,
  MIN_SEMI_AXIS,
  Point,
  beginGesture,
  endGesture,
  updateGesture,
} from './gestures.js';
import { emptyLayout } from './protocol.js';
import { formatDegrees } from './units.js';

/** The slice of the API client the session depends on. */
export interface SessionApi {
  createLayout(layout: LayoutDoc): Promise<RecordDoc>;
  getLayout(id: string): Promise<RecordDoc>;
  editLayout(id: string, op: EditOp, revision: number): Promise<RecordDoc>;
}

/** Zoom/pan state of the canvas viewport. */
export interface CanvasView {
  zoom: number;
  panX: number;
  panY: number;
}

/** A validation failure pinned to the field that caused it. */
export interface InlineError {
  field: string;
  message: string;
}

interface QueuedEdit {
  op: EditOp;
  resolve: (committed: boolean) => void;
}

/** Field path out of a server message shaped like "blobs[1].a: reason". */
function fieldOf(message: string): string {
  const match = /^([A-Za-z0-9_.[\]]+):/.exec(message);
  return match ? match[1] : '';
}

export class EditorSession {
  private record: RecordDoc | null = null;
  private gesture: GestureState | null = null;
  private queue: QueuedEdit[] = [];
  private saveInFlight = false;
  private commitListeners: Array<(record: RecordDoc) => void> = [];
  private changeListeners: Array<() => void> = [];

  selection: number | null = null;
  canvasView: CanvasView = { zoom: 1, panX: 0, panY: 0 };
  /** True while local state is ahead of the server (gesture or queued save). */
  dirty = false;
  /** Set on a stale-revision response; only reload() clears it. */
  conflict = false;
  lastError: InlineError | null = null;

  constructor(private readonly api: SessionApi) {}

  get layoutId(): string | null {
    return this.record?.id ?? null;
  }

  /** The server's revision of this layout; 0 before anything is loaded. */
  get revision(): number {
    return this.record?.revision ?? 0;
  }

  /** Layout as shown on screen: committed state plus any gesture preview. */
  get layout(): LayoutDoc | null {
    if (!this.record) {
      return null;
    }
    const base = this.record.layout;
    if (!this.gesture) {
      return base;
    }
    const blobs = base.blobs.slice();
    blobs[this.gesture.blobIndex] = this.gesture.preview;
    return { ...base, blobs };
  }

  get gestureActive(): boolean {
    return this.gesture !== null;
  }

  /** Degree readout while a rotation gesture is live, e.g. "96.0°". */
  get rotationReadout(): string | null {
    if (!this.gesture || this.gesture.kind !== 'rotation') {
      return null;
    }
    return formatDegrees(this.gesture.preview.theta_rad);
  }

  /** Called after every render-relevant state change. */
  onChange(listener: () => void): void {
    this.changeListeners.push(listener);
  }

  /** Called after every committed edit with the record the server returned. */
  onCommit(listener: (record: RecordDoc) => void): void {
    this.commitListeners.push(listener);
  }

  private emitChange(): void {
    for (const listener of this.changeListeners) {
      listener();
    }
  }

  private emitCommit(record: RecordDoc): void {
    for (const listener of this.commitListeners) {
      listener(record);
    }
  }

  async createNew(canvas: CanvasDoc, caption: string): Promise<RecordDoc> {
    const record = await this.api.createLayout(emptyLayout(canvas, caption));
    this.adopt(record);
    return record;
  }

  async open(id: string): Promise<RecordDoc> {
    const record = await this.api.getLayout(id);
    this.adopt(record);
    return record;
  }

  /** Refetch the record; the only way out of the conflict state. */
  async reload(): Promise<RecordDoc> {
    if (!this.record) {
      throw new Error('no layout loaded');
    }
    const record = await this.api.getLayout(this.record.id);
    this.adopt(record);
    return record;
  }

  private adopt(record: RecordDoc): void {
    this.record = record;
    this.gesture = null;
    for (const queued of this.queue.splice(0)) {
      queued.resolve(false);
    }
    this.conflict = false;
    this.dirty = false;
    this.lastError = null;
    if (this.selection !== null && this.selection >= record.layout.blobs.length) {
      this.selection = null;
    }
    this.emitChange();
  }

  select(index: number | null): void {
    this.selection = index;
    this.emitChange();
  }

  addBlob(blob: BlobDoc): Promise<boolean> {
    return this.commit({ op: 'add', blob });
  }

  removeBlob(index: number): Promise<boolean> {
    if (this.selection === index) {
      this.selection = null;
    }
    return this.commit({ op: 'remove', index });
  }

  /** Start a drag on the selected blob. No-op without a selection. */
  beginGesture(kind: HandleKind, pointer: Point): void {
    const layout = this.record?.layout;
    if (!layout || this.selection === null || this.conflict) {
      return;
    }
    const blob = layout.blobs[this.selection];
    if (!blob) {
      return;
    }
    this.gesture = beginGesture(kind, this.selection, blob, pointer);
    this.dirty = true;
    this.emitChange();
  }

  moveGesture(pointer: Point): void {
    if (!this.gesture) {
      return;
    }
    this.gesture = updateGesture(this.gesture, pointer);
    this.emitChange();
  }

  /** Drop the live preview without committing (pointer cancel / escape). */
  cancelGesture(): void {
    if (!this.gesture) {
      return;
    }
    this.gesture = null;
    this.recomputeDirty();
    this.emitChange();
  }

  /**
   * Release the gesture: validate, then commit its edit operation.
   * Resolves true only when the server accepted the edit.
   */
  endGesture(): Promise<boolean> {
    const gesture = this.gesture;
    if (!gesture) {
      return Promise.resolve(false);
    }
    this.gesture = null;
    const op = endGesture(gesture);
    if (!op) {
      this.recomputeDirty();
      this.emitChange();
      return Promise.resolve(false);
    }
    if (op.op === 'resize' && (op.a < MIN_SEMI_AXIS || op.b < MIN_SEMI_AXIS)) {
      // Under the 1px diameter floor: reject before it reaches the wire.
      const axis = op.a < MIN_SEMI_AXIS ? 'a' : 'b';
      this.lastError = {
        field: `blobs[${op.index}].${axis}`,
        message: 'too small: blobs must stay at least 1px across',
      };
      this.recomputeDirty();
      this.emitChange();
      return Promise.resolve(false);
    }
    return this.commit(op);
  }

  /**
   * Commit a description on blur. Empty text is blocked with a message;
   * unchanged text sends nothing (the escape-cancel path never gets here).
   */
  commitDescription(index: number, text: string): Promise<boolean> {
    const blob = this.record?.layout.blobs[index];
    if (!blob) {
      return Promise.resolve(false);
    }
    if (text.trim() === '') {
      this.lastError = {
        field: `blobs[${index}].description`,
        message: 'description must be non-empty',
      };
      this.emitChange();
      return Promise.resolve(false);
    }
    if (text === blob.description) {
      return Promise.resolve(false);
    }
    return this.commit({ op: 'set_description', index, description: text });
  }

  /**
   * Queue one edit operation. At most one request is in flight; queued
   * operations are sent in order, each with the revision its predecessor
   * returned.
   */
  private commit(op: EditOp): Promise<boolean> {
    if (!this.record) {
      return Promise.resolve(false);
    }
    if (this.conflict) {
      this.lastError = { field: '', message: 'layout changed elsewhere: reload first' };
      this.emitChange();
      return Promise.resolve(false);
    }
    return new Promise((resolve) => {
      this.queue.push({ op, resolve });
      this.dirty = true;
      this.emitChange();
      void this.pump();
    });
  }

  private async pump(): Promise<void> {
    if (this.saveInFlight || !this.record) {
      return;
    }
    const next = this.queue.shift();
    if (!next) {
      return;
    }
    this.saveInFlight = true;
    let committed = false;
    try {
      const record = await this.api.editLayout(this.record.id, next.op, this.record.revision);
      // A reload may have landed while this request was in flight; keep
      // whichever state the server stamped with the higher revision.
      if (!this.record || record.revision >= this.record.revision) {
        this.record = record;
      }
      this.lastError = null;
      committed = true;
    } catch (error) {
      if (error instanceof StaleRevisionError) {
        this.conflict = true;
        for (const queued of this.queue.splice(0)) {
          queued.resolve(false);
        }
      } else if (error instanceof InvariantError) {
        this.lastError = { field: fieldOf(error.message), message: error.message };
      } else {
        // Transport failure: surface it and drop the queue rather than
        // retrying blind against an unknown server state.
        const message = error instanceof Error ? error.message : String(error);
        this.lastError = { field: '', message };
        for (const queued of this.queue.splice(0)) {
          queued.resolve(false);
        }
      }
    }
    this.saveInFlight = false;
    this.recomputeDirty();
    next.resolve(committed);
    if (committed && this.record) {
      this.emitCommit(this.record);
    }
    this.emitChange();
    if (this.queue.length > 0) {
      void this.pump();
    }
  }

  private recomputeDirty(): void {
    this.dirty = this.gesture !== null || this.saveInFlight || this.queue.length > 0;
  }
}
