/**
 * Markup builders for the editor's overlay layers.
 *
 * Pure string-producing functions so they can be exercised without a
 * browser; the page assigns the results to innerHTML. The ellipses and
 * handles drawn here are presentational (the shapes being dragged); every
 * derived number in the diagnostics panel is read from a stored server
 * response, never computed here.
 */

import type { AttentionMaskDoc, CanvasDoc, DiagnosticsDoc, LayoutDoc } from './protocol.js';
import { handlePosition } from './gestures.js';
import { formatCoverage, formatIou, SpatialCheck } from './diagnostics.js';
import { radToDeg } from './units.js';

/** Same category color cycle the server uses for its SVG renders. */
export const PALETTE = [
  '#e6194b',
  '#3cb44b',
  '#4363d8',
  '#f58231',
  '#911eb4',
  '#46f0f0',
  '#f032e6',
  '#bcf60c',
  '#fabebe',
  '#008080',
  '#e6beff',
  '#9a6324',
  '#fffac8',
  '#800000',
  '#aaffc3',
];

export function blobColor(index: number): string {
  return PALETTE[index % PALETTE.length];
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;')
    .replaceAll("'", '&#39;');
}

function fmt(value: number): string {
  return value.toFixed(3);
}

/**
 * Ellipse outlines with category labels; the selected blob also gets its
 * axis handles, rotation handle, and axis guide lines.
 */
export function outlinesSvg(layout: LayoutDoc, selection: number | null): string {
  const parts: string[] = [];
  layout.blobs.forEach((blob, index) => {
    const color = blobColor(index);
    const deg = fmt(radToDeg(blob.theta_rad));
    const selected = index === selection;
    parts.push(
      `<g class="blob${selected ? ' selected' : ''}" data-index="${index}">` +
        `<g transform="rotate(${deg} ${fmt(blob.cx)} ${fmt(blob.cy)})">` +
        `<ellipse cx="${fmt(blob.cx)}" cy="${fmt(blob.cy)}" rx="${fmt(blob.a)}" ry="${fmt(blob.b)}"` +
        ` fill="${color}" fill-opacity="${selected ? 0.3 : 0.15}"` +
        ` stroke="${color}" stroke-width="${selected ? 2.5 : 1.5}"/>` +
        `</g>` +
        `<text x="${fmt(blob.cx)}" y="${fmt(blob.cy)}" class="blob-label" fill="${color}">` +
        `${escapeHtml(blob.category)}</text>` +
        `</g>`,
    );
    if (selected) {
      const major = handlePosition(blob, 'major-axis');
      const minor = handlePosition(blob, 'minor-axis');
      const rot = handlePosition(blob, 'rotation');
      parts.push(
        `<g class="handles">` +
          `<line x1="${fmt(blob.cx)}" y1="${fmt(blob.cy)}" x2="${fmt(rot.x)}" y2="${fmt(rot.y)}"` +
          ` stroke="${color}" stroke-dasharray="4 3" stroke-width="1"/>` +
          `<line x1="${fmt(blob.cx)}" y1="${fmt(blob.cy)}" x2="${fmt(minor.x)}" y2="${fmt(minor.y)}"` +
          ` stroke="${color}" stroke-dasharray="4 3" stroke-width="1"/>` +
          `<circle class="handle major" data-handle="major-axis" cx="${fmt(major.x)}" cy="${fmt(major.y)}" r="6"` +
          ` fill="#ffffff" stroke="${color}" stroke-width="2"/>` +
          `<rect class="handle minor" data-handle="minor-axis" x="${fmt(minor.x - 5)}" y="${fmt(minor.y - 5)}"` +
          ` width="10" height="10" fill="#ffffff" stroke="${color}" stroke-width="2"/>` +
          `<circle class="handle rotation" data-handle="rotation" cx="${fmt(rot.x)}" cy="${fmt(rot.y)}" r="6"` +
          ` fill="${color}" stroke="#ffffff" stroke-width="2"/>` +
          `</g>`,
      );
    }
  });
  return parts.join('');
}

/**
 * The downsampled attention grid: h*w cells stretched over the canvas,
 * set bits filled. Bits are row-major, exactly as the server sent them.
 */
export function attentionGridSvg(doc: AttentionMaskDoc, canvas: CanvasDoc): string {
  const cellW = canvas.w / doc.w;
  const cellH = canvas.h / doc.h;
  const parts: string[] = ['<g class="attention-grid">'];
  for (let row = 0; row < doc.h; row++) {
    for (let col = 0; col < doc.w; col++) {
      if (doc.bits[row * doc.w + col]) {
        parts.push(
          `<rect class="attention-cell" x="${fmt(col * cellW)}" y="${fmt(row * cellH)}"` +
            ` width="${fmt(cellW)}" height="${fmt(cellH)}" fill="#ffd000" fill-opacity="0.35"/>`,
        );
      }
    }
  }
  for (let row = 1; row < doc.h; row++) {
    parts.push(
      `<line x1="0" y1="${fmt(row * cellH)}" x2="${fmt(canvas.w)}" y2="${fmt(row * cellH)}"` +
        ` stroke="#888888" stroke-width="0.5" stroke-opacity="0.6"/>`,
    );
  }
  for (let col = 1; col < doc.w; col++) {
    parts.push(
      `<line x1="${fmt(col * cellW)}" y1="0" x2="${fmt(col * cellW)}" y2="${fmt(canvas.h)}"` +
        ` stroke="#888888" stroke-width="0.5" stroke-opacity="0.6"/>`,
    );
  }
  parts.push('</g>');
  return parts.join('');
}

/** Marker distinguishing rows whose numbers came straight off the server. */
const SERVER_VALUE = 'data-source="server"';

/**
 * The pairwise-overlap heat list plus the headline diagnostics, as HTML.
 * All numbers are read from the stored /diagnostics response.
 */
export function heatListHtml(layout: LayoutDoc, doc: DiagnosticsDoc | null): string {
  if (!doc) {
    return '<p class="placeholder">no diagnostics yet</p>';
  }
  const names = layout.blobs.map((blob, i) => `${i}:${escapeHtml(blob.category)}`);
  const rows: Array<{ label: string; value: number }> = [];
  for (let i = 0; i < names.length; i++) {
    for (let j = i + 1; j < names.length; j++) {
      rows.push({ label: `${names[i]} × ${names[j]}`, value: doc.pairwise_ious[i][j] });
    }
  }
  rows.sort((p, q) => q.value - p.value);
  const parts: string[] = [];
  parts.push(
    `<p class="coverage">coverage <span class="value" ${SERVER_VALUE}>` +
      `${formatCoverage(doc.coverage)}</span></p>`,
  );
  const flagged = doc.out_of_canvas
    .map((flag, i) => (flag ? names[i] : null))
    .filter((name): name is string => name !== null);
  if (flagged.length > 0) {
    parts.push(`<p class="out-of-canvas">beyond canvas: ${flagged.join(', ')}</p>`);
  }
  if (doc.empty_masks.length > 0) {
    const empty = doc.empty_masks.map((i) => names[i] ?? `#${i}`);
    parts.push(`<p class="empty-masks">zero-pixel masks: ${empty.join(', ')}</p>`);
  }
  if (rows.length === 0) {
    parts.push('<p class="placeholder">fewer than two blobs: no pairs to compare</p>');
  } else {
    const items = rows
      .map(
        (row) =>
          `<li style="--heat:${row.value.toFixed(3)}"><span class="pair">${row.label}</span>` +
          `<span class="iou" ${SERVER_VALUE}>${formatIou(row.value)}</span></li>`,
      )
      .join('');
    parts.push(`<ol class="heat-list">${items}</ol>`);
  }
  return parts.join('');
}

/** Displayed IOU strings, in display order, scraped from heat-list HTML. */
export function displayedIous(html: string): string[] {
  const out: string[] = [];
  const pattern = /class="iou" data-source="server">([0-9.]+)</g;
  let match: RegExpExecArray | null;
  while ((match = pattern.exec(html)) !== null) {
    out.push(match[1]);
  }
  return out;
}

export function spatialCheckHtml(check: SpatialCheck | null): string {
  if (!check) {
    return '';
  }
  const cls = check.accurate ? 'pass' : 'fail';
  const verdict = check.accurate ? 'holds' : 'violated';
  return (
    `<p class="spatial-check ${cls}" ${SERVER_VALUE}>spatial relation ${verdict}` +
    ` <span class="detail">(${escapeHtml(check.detail)})</span></p>`
  );
}

/** The prompt preview panel body: server text, shown verbatim. */
export function promptPreviewHtml(text: string): string {
  return `<pre class="prompt-preview">${escapeHtml(text)}</pre>`;
}
