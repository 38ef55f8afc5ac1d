/**
 * Server-computed layout diagnostics, held for display.
 *
 * Every number shown in the panel (pairwise IOUs, coverage, out-of-canvas
 * flags, the optional spatial check) is stored verbatim from a
 * /diagnostics or /eval response; nothing is recomputed client-side, so a
 * displayed value is always traceable to captured traffic. refresh() is
 * wired to run after every committed edit.
 */

import type { DiagnosticsDoc, LayoutDoc, MetricsReportDoc, SpatialSpecDoc } from './protocol.js';

/** The slice of the API client the view depends on. */
export interface DiagnosticsApi {
  diagnostics(layout: LayoutDoc): Promise<DiagnosticsDoc>;
  evalLayouts(benchmark: string, layouts: Record<string, LayoutDoc>): Promise<MetricsReportDoc>;
}

export interface SpatialCheck {
  accurate: boolean;
  detail: string;
}

/** Display form of one IOU; shared so tests can compare displayed text. */
export function formatIou(value: number): string {
  return value.toFixed(4);
}

/** Display form of the coverage fraction, e.g. "12.3%". */
export function formatCoverage(value: number): string {
  return `${(value * 100).toFixed(1)}%`;
}

export class DiagnosticsView {
  /** Last /diagnostics response, verbatim. */
  doc: DiagnosticsDoc | null = null;
  /** Last /eval verdict for the loaded spatial spec, verbatim. */
  spatialCheck: SpatialCheck | null = null;

  private spatialSpec: SpatialSpecDoc | null = null;
  private changeListeners: Array<() => void> = [];
  private epoch = 0;

  constructor(private readonly api: DiagnosticsApi) {}

  onChange(listener: () => void): void {
    this.changeListeners.push(listener);
  }

  private emitChange(): void {
    for (const listener of this.changeListeners) {
      listener();
    }
  }

  /** Set (or clear) the spatial relation the panel should keep checking. */
  setSpatialSpec(spec: SpatialSpecDoc | null): void {
    this.spatialSpec = spec;
    this.spatialCheck = null;
    this.emitChange();
  }

  get hasSpatialSpec(): boolean {
    return this.spatialSpec !== null;
  }

  /** Refetch all panel values for the given layout. */
  async refresh(layout: LayoutDoc): Promise<void> {
    const ticket = ++this.epoch;
    const doc = await this.api.diagnostics(layout);
    let spatial: SpatialCheck | null = null;
    if (this.spatialSpec) {
      const benchmark = JSON.stringify({
        id: 'check',
        type: 'spatial',
        spec: this.spatialSpec,
        caption: layout.caption,
      });
      const report = await this.api.evalLayouts(benchmark, { check: layout });
      const first = report.per_case[0];
      if (first) {
        spatial = { accurate: first.accurate, detail: first.detail };
      }
    }
    if (ticket !== this.epoch) {
      return; // a newer refresh superseded this one
    }
    this.doc = doc;
    this.spatialCheck = spatial;
    this.emitChange();
  }
}
