/**
 * Typed client for the layout service HTTP JSON API.
 *
 * One method per endpoint; the client marshals documents and translates
 * the server's error statuses into typed exceptions: 400 request rejected
 * (malformed input), 404 record missing, 409 stale revision (with the
 * expected/got pair), 422 invariant violation whose message names the
 * offending field. The fetch implementation is injectable so tests can
 * record or script traffic.
 */

import type {
  AttentionMaskDoc,
  BlobDoc,
  CanvasDoc,
  DemoPayload,
  DiagnosticsDoc,
  EditOp,
  ImportResultDoc,
  LayoutDoc,
  MetricsReportDoc,
  PromptKind,
  PromptResultDoc,
  RasterizeDoc,
  RecordDoc,
} from './protocol.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly body: unknown,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

/** 400: the server could not parse the request. */
export class RequestRejectedError extends ApiError {
  constructor(message: string, body: unknown) {
    super(400, message, body);
    this.name = 'RequestRejectedError';
  }
}

/** 404: no record with that id. */
export class RecordMissingError extends ApiError {
  constructor(message: string, body: unknown) {
    super(404, message, body);
    this.name = 'RecordMissingError';
  }
}

/** 409: the record moved on; `expected` is its current revision. */
export class StaleRevisionError extends ApiError {
  constructor(
    message: string,
    body: unknown,
    readonly expected: number,
    readonly got: number,
  ) {
    super(409, message, body);
    this.name = 'StaleRevisionError';
  }
}

/** 422: well-formed input that breaks a domain invariant. */
export class InvariantError extends ApiError {
  constructor(message: string, body: unknown) {
    super(422, message, body);
    this.name = 'InvariantError';
  }
}

async function errorFromResponse(response: Response): Promise<ApiError> {
  let body: unknown = null;
  let message = `HTTP ${response.status}`;
  try {
    body = await response.json();
    const reported = (body as { error?: unknown }).error;
    if (typeof reported === 'string') {
      message = reported;
    }
  } catch {
    // Non-JSON error body; keep the status line as the message.
  }
  switch (response.status) {
    case 400:
      return new RequestRejectedError(message, body);
    case 404:
      return new RecordMissingError(message, body);
    case 409: {
      const doc = body as { expected?: number; got?: number };
      return new StaleRevisionError(message, body, doc.expected ?? -1, doc.got ?? -1);
    }
    case 422:
      return new InvariantError(message, body);
    default:
      return new ApiError(response.status, message, body);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    // Bind so a bare `fetch` keeps its global receiver.
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      throw await errorFromResponse(response);
    }
    return response;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.json<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<{ status: string }> {
    return this.json('/healthz');
  }

  createLayout(layout: LayoutDoc): Promise<RecordDoc> {
    return this.post('/layouts', layout);
  }

  getLayout(id: string): Promise<RecordDoc> {
    return this.json(`/layouts/${encodeURIComponent(id)}`);
  }

  putLayout(id: string, revision: number, layout: LayoutDoc): Promise<RecordDoc> {
    return this.json(`/layouts/${encodeURIComponent(id)}`, {
      method: 'PUT',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ revision, layout }),
    });
  }

  /** Apply one edit; the revision guards against concurrent writers. */
  editLayout(id: string, op: EditOp, revision: number): Promise<RecordDoc> {
    return this.post(`/layouts/${encodeURIComponent(id)}/edit`, { ...op, revision });
  }

  rasterize(layout: LayoutDoc): Promise<RasterizeDoc> {
    return this.post('/rasterize', layout);
  }

  diagnostics(layout: LayoutDoc): Promise<DiagnosticsDoc> {
    return this.post('/diagnostics', layout);
  }

  attentionMask(blob: BlobDoc, h: number, w: number, canvas: CanvasDoc): Promise<AttentionMaskDoc> {
    return this.post('/attention-mask', { blob, h, w, canvas });
  }

  /** Score JSONL benchmark text against layouts keyed by case id. */
  evalLayouts(benchmark: string, layouts: Record<string, LayoutDoc>): Promise<MetricsReportDoc> {
    return this.post('/eval', { benchmark, layouts });
  }

  /** Raw export text, byte-for-byte as the server serialized it. */
  async exportText(id: string, format: 'css' | 'json'): Promise<string> {
    const response = await this.request(`/export/${encodeURIComponent(id)}?format=${format}`);
    return response.text();
  }

  importText(format: 'css' | 'json', text: string, canvas?: CanvasDoc): Promise<ImportResultDoc> {
    const body: Record<string, unknown> = { format, text };
    if (canvas) {
      body.canvas = canvas;
    }
    return this.post('/import', body);
  }

  /** Render a few-shot prompt; demonstrations are [caption, payload] pairs. */
  prompt(
    kind: PromptKind,
    testCaption: string,
    demonstrations: Array<[string, DemoPayload]>,
    canvas?: CanvasDoc,
  ): Promise<PromptResultDoc> {
    const body: Record<string, unknown> = {
      kind,
      test_caption: testCaption,
      demonstrations,
    };
    if (canvas) {
      body.canvas = canvas;
    }
    return this.post('/prompt', body);
  }
}
