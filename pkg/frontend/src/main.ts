/**
 * Browser wiring for the blob layout editor.
 *
 * Pulls the pieces together: an EditorSession (revision-safe edits), a
 * DiagnosticsView (server-computed numbers), overlay markup builders, and
 * the pointer/keyboard plumbing. All geometry authority stays with the
 * server; this file only routes events and repaints.
 */

import { ApiClient } from './api.js';
import { DiagnosticsView } from './diagnostics.js';
import { hitTest, Point } from './gestures.js';
import {
  attentionGridSvg,
  blobColor,
  escapeHtml,
  heatListHtml,
  outlinesSvg,
  promptPreviewHtml,
  spatialCheckHtml,
} from './overlays.js';
import type {
  AttentionMaskDoc,
  BlobDoc,
  LayoutDoc,
  PromptKind,
  RasterizeDoc,
  SpatialRelation,
} from './protocol.js';
import { decodeRle } from './rle.js';
import { EditorSession } from './session.js';
import { formatDegrees } from './units.js';

const DEFAULT_BASE_URL = 'http://127.0.0.1:8000';
const TOAST_MS = 6000;
const ZOOM_STEPS = [0.25, 0.5, 0.75, 1, 1.5, 2, 3, 4];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing page element #${id}`);
  }
  return node as T;
}

function intValue(input: HTMLInputElement, fallback: number): number {
  const value = Number.parseInt(input.value, 10);
  return Number.isFinite(value) && value > 0 ? value : fallback;
}

/** One connected editor over a base URL. */
class EditorApp {
  readonly api: ApiClient;
  readonly session: EditorSession;
  readonly diagnostics: DiagnosticsView;

  private attentionDoc: AttentionMaskDoc | null = null;
  private rasterDoc: RasterizeDoc | null = null;
  private promptText = '';

  constructor(readonly baseUrl: string) {
    this.api = new ApiClient(baseUrl);
    this.session = new EditorSession(this.api);
    this.diagnostics = new DiagnosticsView(this.api);

    this.session.onChange(() => this.render());
    this.diagnostics.onChange(() => this.renderDiagnostics());
    this.session.onCommit(() => {
      void this.refreshDerived();
    });
  }

  /** Refetch everything that depends on the committed layout. */
  async refreshDerived(): Promise<void> {
    const layout = this.session.layout;
    if (!layout) {
      return;
    }
    await Promise.allSettled([
      this.diagnostics.refresh(layout),
      this.refreshMasks(),
      this.refreshAttention(),
      this.refreshPrompt(),
    ]);
    this.render();
  }

  async refreshMasks(): Promise<void> {
    const layout = this.session.layout;
    if (!layout) {
      return;
    }
    this.rasterDoc = await this.api.rasterize(layout);
    this.paintMasks();
  }

  async refreshAttention(): Promise<void> {
    const layout = this.session.layout;
    if (!layout || layout.blobs.length === 0) {
      this.attentionDoc = null;
      return;
    }
    const index = this.session.selection ?? 0;
    const blob = layout.blobs[index] ?? layout.blobs[0];
    const h = intValue(el<HTMLInputElement>('att-h'), 8);
    const w = intValue(el<HTMLInputElement>('att-w'), 8);
    this.attentionDoc = await this.api.attentionMask(blob, h, w, layout.canvas);
  }

  async refreshPrompt(): Promise<void> {
    const layout = this.session.layout;
    if (!layout) {
      return;
    }
    const kind = el<HTMLSelectElement>('prompt-kind').value as PromptKind;
    const demo =
      kind === 'parameter'
        ? layout
        : layout.blobs.map((blob) => ({ category: blob.category, sentence: blob.description }));
    const result = await this.api.prompt(
      kind,
      layout.caption,
      [[layout.caption, demo]],
      layout.canvas,
    );
    this.promptText = result.text;
  }

  /** Blend every decoded mask into the raster layer, one tint per blob. */
  paintMasks(): void {
    const canvas = el<HTMLCanvasElement>('mask-layer');
    const context = canvas.getContext('2d');
    const doc = this.rasterDoc;
    if (!context || !doc) {
      return;
    }
    canvas.width = doc.width;
    canvas.height = doc.height;
    const image = context.createImageData(doc.width, doc.height);
    const data = image.data;
    for (const mask of doc.masks) {
      const bits = decodeRle(mask.rle, doc.width, doc.height);
      const hex = blobColor(mask.index);
      const r = Number.parseInt(hex.slice(1, 3), 16);
      const g = Number.parseInt(hex.slice(3, 5), 16);
      const b = Number.parseInt(hex.slice(5, 7), 16);
      const alpha = 0.45;
      for (let i = 0; i < bits.length; i++) {
        if (!bits[i]) {
          continue;
        }
        const o = i * 4;
        data[o] = r * alpha + data[o] * (1 - alpha);
        data[o + 1] = g * alpha + data[o + 1] * (1 - alpha);
        data[o + 2] = b * alpha + data[o + 2] * (1 - alpha);
        data[o + 3] = Math.min(255, data[o + 3] + 255 * alpha);
      }
    }
    context.putImageData(image, 0, 0);
  }

  render(): void {
    const layout = this.session.layout;
    const stage = el<HTMLDivElement>('stage');
    const svg = el<HTMLElement>('vector-layer');
    const maskCanvas = el<HTMLCanvasElement>('mask-layer');
    const emptyHint = el<HTMLDivElement>('empty-hint');

    if (!layout) {
      stage.style.display = 'none';
      el<HTMLDivElement>('no-layout-hint').style.display = 'block';
      this.renderStatus();
      return;
    }
    stage.style.display = 'block';
    el<HTMLDivElement>('no-layout-hint').style.display = 'none';

    const { w, h } = layout.canvas;
    const zoom = this.session.canvasView.zoom;
    stage.style.width = `${w * zoom}px`;
    stage.style.height = `${h * zoom}px`;
    svg.setAttribute('viewBox', `0 0 ${w} ${h}`);

    const showOutlines = el<HTMLInputElement>('toggle-outlines').checked;
    const showMasks = el<HTMLInputElement>('toggle-masks').checked;
    const showAttention = el<HTMLInputElement>('toggle-attention').checked;

    maskCanvas.style.display = showMasks ? 'block' : 'none';
    let markup = '';
    if (showAttention && this.attentionDoc) {
      markup += attentionGridSvg(this.attentionDoc, layout.canvas);
    }
    if (showOutlines) {
      markup += outlinesSvg(layout, this.session.selection);
    }
    svg.innerHTML = markup;

    emptyHint.style.display = layout.blobs.length === 0 ? 'flex' : 'none';

    this.renderBlobList(layout);
    this.renderStatus();
    this.renderDiagnostics();
    el<HTMLDivElement>('prompt-panel').innerHTML = this.promptText
      ? promptPreviewHtml(this.promptText)
      : '<p class="placeholder">no prompt yet</p>';
  }

  renderBlobList(layout: LayoutDoc): void {
    const list = el<HTMLDivElement>('blob-list');
    // Rebuilding while a description is being typed would eat the focus.
    if (list.contains(document.activeElement)) {
      return;
    }
    const cards = layout.blobs.map((blob, index) => {
      const selected = index === this.session.selection;
      const deg = formatDegrees(blob.theta_rad);
      return (
        `<div class="blob-card${selected ? ' selected' : ''}" data-index="${index}">` +
        `<div class="card-head">` +
        `<span class="dot" style="background:${blobColor(index)}"></span>` +
        `<span class="category">${escapeHtml(blob.category)}</span>` +
        `<button class="remove" data-remove="${index}" title="remove blob">×</button>` +
        `</div>` +
        `<div class="params">center (${blob.cx.toFixed(1)}, ${blob.cy.toFixed(1)})` +
        ` · axes ${blob.a.toFixed(1)}/${blob.b.toFixed(1)} · ${deg}</div>` +
        `<textarea class="description" data-describe="${index}" rows="2"` +
        ` placeholder="description">${escapeHtml(blob.description)}</textarea>` +
        `</div>`
      );
    });
    list.innerHTML = cards.join('') || '<p class="placeholder">no blobs yet</p>';
  }

  renderStatus(): void {
    const status = el<HTMLSpanElement>('status');
    const id = this.session.layoutId;
    if (!id) {
      status.textContent = 'no layout';
    } else {
      const state = this.session.dirty ? 'saving…' : 'saved';
      status.textContent = `${id.slice(0, 8)} · revision ${this.session.revision} · ${state}`;
    }

    const readout = el<HTMLSpanElement>('angle-readout');
    readout.textContent = this.session.rotationReadout ?? '';

    el<HTMLDivElement>('conflict-bar').style.display = this.session.conflict ? 'flex' : 'none';

    const errorBar = el<HTMLDivElement>('error-bar');
    const error = this.session.lastError;
    if (error) {
      errorBar.style.display = 'block';
      errorBar.textContent = error.field ? `${error.field}: ${error.message}` : error.message;
    } else {
      errorBar.style.display = 'none';
    }
  }

  renderDiagnostics(): void {
    const layout = this.session.layout;
    const panel = el<HTMLDivElement>('diagnostics-panel');
    if (!layout) {
      panel.innerHTML = '<p class="placeholder">no layout</p>';
      return;
    }
    panel.innerHTML =
      heatListHtml(layout, this.diagnostics.doc) + spatialCheckHtml(this.diagnostics.spatialCheck);
  }
}

let app: EditorApp | null = null;
let toastTimer: ReturnType<typeof setTimeout> | null = null;

function toast(message: string): void {
  const node = el<HTMLDivElement>('toast');
  node.textContent = message;
  node.style.display = 'block';
  if (toastTimer) {
    clearTimeout(toastTimer);
  }
  toastTimer = setTimeout(() => {
    node.style.display = 'none';
  }, TOAST_MS);
}

function reportFailure(context: string, error: unknown): void {
  const message = error instanceof Error ? error.message : String(error);
  toast(`${context}: ${message}`);
}

/** Pointer event position in canvas pixels (zoom-independent). */
function canvasPoint(event: PointerEvent): Point {
  const svg = el<HTMLElement>('vector-layer');
  const rect = svg.getBoundingClientRect();
  const layout = app?.session.layout;
  if (!layout || rect.width === 0 || rect.height === 0) {
    return { x: 0, y: 0 };
  }
  return {
    x: ((event.clientX - rect.left) * layout.canvas.w) / rect.width,
    y: ((event.clientY - rect.top) * layout.canvas.h) / rect.height,
  };
}

function connect(): void {
  const input = el<HTMLInputElement>('base-url');
  const baseUrl = input.value.trim().replace(/\/$/, '') || DEFAULT_BASE_URL;
  localStorage.setItem('blobkit-base-url', baseUrl);
  app = new EditorApp(baseUrl);
  app
    .api.health()
    .then(() => {
      toast(`connected to ${baseUrl}`);
      const savedId = localStorage.getItem('blobkit-layout-id');
      if (savedId) {
        return app?.session
          .open(savedId)
          .then(() => app?.refreshDerived())
          .catch(() => {
            localStorage.removeItem('blobkit-layout-id');
          });
      }
      return undefined;
    })
    .catch((error) => reportFailure('connect failed', error));
  app.render();
}

function newLayout(): void {
  if (!app) {
    return;
  }
  const current = app;
  const w = intValue(el<HTMLInputElement>('canvas-w'), 512);
  const h = intValue(el<HTMLInputElement>('canvas-h'), 512);
  const caption = el<HTMLInputElement>('caption').value.trim() || 'untitled layout';
  current.session
    .createNew({ w, h }, caption)
    .then((record) => {
      localStorage.setItem('blobkit-layout-id', record.id);
      return current.refreshDerived();
    })
    .catch((error) => reportFailure('create failed', error));
}

function addBlob(): void {
  const layout = app?.session.layout;
  if (!app || !layout) {
    return;
  }
  const current = app;
  const category = el<HTMLInputElement>('category').value.trim() || 'object';
  const { w, h } = layout.canvas;
  const a = Math.max(w, h) / 8;
  const b = Math.min(w, h) / 10;
  const blob: BlobDoc = {
    category,
    cx: w / 2,
    cy: h / 2,
    a: Math.max(a, b),
    b: Math.min(a, b),
    theta_rad: 0,
    description: category,
  };
  current.session
    .addBlob(blob)
    .then((committed) => {
      if (committed) {
        current.session.select((current.session.layout?.blobs.length ?? 1) - 1);
        void current.refreshAttention().then(() => current.render());
      }
    })
    .catch((error) => reportFailure('add failed', error));
}

function spatialSpecFromForm(): void {
  if (!app) {
    return;
  }
  const subject = el<HTMLInputElement>('spatial-subject').value.trim();
  const object = el<HTMLInputElement>('spatial-object').value.trim();
  const relation = el<HTMLSelectElement>('spatial-relation').value as SpatialRelation;
  if (!subject || !object) {
    app.diagnostics.setSpatialSpec(null);
    return;
  }
  app.diagnostics.setSpatialSpec({ subject, relation, object });
  const layout = app.session.layout;
  if (layout) {
    app.diagnostics.refresh(layout).catch((error) => reportFailure('spatial check failed', error));
  }
}

function wireStagePointerEvents(): void {
  const svg = el<HTMLElement>('vector-layer');

  svg.addEventListener('pointerdown', (event) => {
    const layout = app?.session.layout;
    if (!app || !layout) {
      return;
    }
    const point = canvasPoint(event);
    const hit = hitTest(layout, point, app.session.selection);
    if (!hit) {
      app.session.select(null);
      return;
    }
    if (app.session.selection !== hit.blobIndex) {
      app.session.select(hit.blobIndex);
      void app.refreshAttention().then(() => app?.render());
    }
    app.session.beginGesture(hit.kind, point);
    svg.setPointerCapture(event.pointerId);
    event.preventDefault();
  });

  svg.addEventListener('pointermove', (event) => {
    if (!app?.session.gestureActive) {
      return;
    }
    app.session.moveGesture(canvasPoint(event));
  });

  const finish = (event: PointerEvent) => {
    if (!app?.session.gestureActive) {
      return;
    }
    const current = app;
    if (svg.hasPointerCapture(event.pointerId)) {
      svg.releasePointerCapture(event.pointerId);
    }
    current.session
      .endGesture()
      .catch((error) => reportFailure('edit failed', error));
  };
  svg.addEventListener('pointerup', finish);
  svg.addEventListener('pointercancel', () => app?.session.cancelGesture());

  document.addEventListener('keydown', (event) => {
    if (event.key === 'Escape' && app?.session.gestureActive) {
      app.session.cancelGesture();
    }
  });
}

function wireBlobListEvents(): void {
  const list = el<HTMLDivElement>('blob-list');

  list.addEventListener('click', (event) => {
    if (!app) {
      return;
    }
    const target = event.target as HTMLElement;
    const removeIndex = target.dataset.remove;
    if (removeIndex !== undefined) {
      app.session
        .removeBlob(Number.parseInt(removeIndex, 10))
        .catch((error) => reportFailure('remove failed', error));
      return;
    }
    const card = target.closest<HTMLElement>('.blob-card');
    if (card?.dataset.index !== undefined) {
      app.session.select(Number.parseInt(card.dataset.index, 10));
      void app.refreshAttention().then(() => app?.render());
    }
  });

  // Commit a description when its editor loses focus; escape cancels
  // without sending anything.
  list.addEventListener(
    'blur',
    (event) => {
      const target = event.target as HTMLTextAreaElement;
      if (!app || target.dataset.describe === undefined) {
        return;
      }
      if (target.dataset.cancelled === 'yes') {
        delete target.dataset.cancelled;
        app.render();
        return;
      }
      const index = Number.parseInt(target.dataset.describe, 10);
      app.session
        .commitDescription(index, target.value)
        .catch((error) => reportFailure('description failed', error));
    },
    true,
  );

  list.addEventListener('keydown', (event) => {
    const target = event.target as HTMLTextAreaElement;
    if (target.dataset.describe === undefined) {
      return;
    }
    if (event.key === 'Escape') {
      target.dataset.cancelled = 'yes';
      target.blur();
    } else if (event.key === 'Enter' && !event.shiftKey) {
      event.preventDefault();
      target.blur();
    }
  });
}

function wireToolbar(): void {
  el<HTMLButtonElement>('connect').addEventListener('click', connect);
  el<HTMLButtonElement>('new-layout').addEventListener('click', newLayout);
  el<HTMLButtonElement>('add-blob').addEventListener('click', addBlob);
  el<HTMLButtonElement>('add-blob-hint').addEventListener('click', addBlob);
  el<HTMLButtonElement>('reload').addEventListener('click', () => {
    app?.session
      .reload()
      .then(() => app?.refreshDerived())
      .catch((error) => reportFailure('reload failed', error));
  });

  for (const id of ['toggle-outlines', 'toggle-masks', 'toggle-attention']) {
    el<HTMLInputElement>(id).addEventListener('change', () => app?.render());
  }
  for (const id of ['att-h', 'att-w']) {
    el<HTMLInputElement>(id).addEventListener('change', () => {
      void app?.refreshAttention().then(() => app?.render());
    });
  }
  el<HTMLSelectElement>('prompt-kind').addEventListener('change', () => {
    void app?.refreshPrompt().then(() => app?.render());
  });

  el<HTMLButtonElement>('zoom-in').addEventListener('click', () => stepZoom(1));
  el<HTMLButtonElement>('zoom-out').addEventListener('click', () => stepZoom(-1));

  el<HTMLButtonElement>('export-css').addEventListener('click', () => exportLayout('css'));
  el<HTMLButtonElement>('export-json').addEventListener('click', () => exportLayout('json'));
  el<HTMLButtonElement>('import-btn').addEventListener('click', importLayout);

  el<HTMLButtonElement>('spatial-apply').addEventListener('click', spatialSpecFromForm);
  el<HTMLButtonElement>('spatial-clear').addEventListener('click', () => {
    el<HTMLInputElement>('spatial-subject').value = '';
    el<HTMLInputElement>('spatial-object').value = '';
    app?.diagnostics.setSpatialSpec(null);
  });
}

function stepZoom(direction: number): void {
  if (!app) {
    return;
  }
  const zoom = app.session.canvasView.zoom;
  let index = ZOOM_STEPS.findIndex((step) => step >= zoom);
  if (index < 0) {
    index = ZOOM_STEPS.length - 1;
  }
  const next = ZOOM_STEPS[Math.min(Math.max(index + direction, 0), ZOOM_STEPS.length - 1)];
  app.session.canvasView.zoom = next;
  el<HTMLSpanElement>('zoom-readout').textContent = `${Math.round(next * 100)}%`;
  app.render();
}

function exportLayout(format: 'css' | 'json'): void {
  const id = app?.session.layoutId;
  if (!app || !id) {
    return;
  }
  // The text area shows the server's bytes untouched, so what the user
  // copies is exactly what /export produced.
  app.api
    .exportText(id, format)
    .then((text) => {
      el<HTMLTextAreaElement>('io-text').value = text;
      toast(`exported ${format}`);
    })
    .catch((error) => reportFailure('export failed', error));
}

function importLayout(): void {
  if (!app) {
    return;
  }
  const current = app;
  const format = el<HTMLSelectElement>('import-format').value as 'css' | 'json';
  const text = el<HTMLTextAreaElement>('io-text').value;
  const layout = current.session.layout;
  current.api
    .importText(format, text, layout?.canvas)
    .then((result) => {
      localStorage.setItem('blobkit-layout-id', result.id);
      const notes: string[] = [`imported as ${result.id.slice(0, 8)}`];
      if (result.rejects.length > 0) {
        notes.push(`${result.rejects.length} line(s) rejected`);
      }
      if (format === 'css') {
        notes.push('pixel and degree values are integers in this format, so shapes sit on the integer grid');
      }
      toast(notes.join(' · '));
      return current.session.open(result.id).then(() => current.refreshDerived());
    })
    .catch((error) => reportFailure('import failed', error));
}

function bootstrap(): void {
  const input = el<HTMLInputElement>('base-url');
  input.value = localStorage.getItem('blobkit-base-url') ?? DEFAULT_BASE_URL;
  wireToolbar();
  wireStagePointerEvents();
  wireBlobListEvents();
  connect();
}

document.addEventListener('DOMContentLoaded', bootstrap);
