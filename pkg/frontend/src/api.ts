/** Typed client for the studio HTTP service.
 *
 * Every displayed geometry comes from one of these calls; the client
 * never derives points locally. Responses that feed the renderer carry
 * a body hash so the debug panel can prove what is on screen.
 */

import { fnv1a32 } from "./hash.js";
import type { Instruction } from "./instruction.js";

export interface UploadResult {
  id: string;
  point_count: number;
  bounds: [number[], number[]];
}

export interface PreviewPayload {
  id: string | null;
  total: number;
  count: number;
  positions: number[][];
  source_indices: number[];
  mask: number[] | null;
}

export interface SynthPreview extends PreviewPayload {
  masked: number;
  provenance: Record<string, unknown>;
}

export interface CommitResult {
  id: string;
  point_count: number;
  masked: number;
  links: { download: string; preview: string };
  provenance: Record<string, unknown>;
}

export interface ValidationReport {
  valid: boolean;
  violations: { field: string; rule: string; message: string }[];
}

/** Server failure envelope, preserved for inline display. */
export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail: unknown = null,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function parseFailure(res: Response): Promise<never> {
  let code = "http_error";
  let message = `request failed with status ${res.status}`;
  let detail: unknown = null;
  try {
    const doc = await res.json();
    code = doc.code ?? code;
    message = doc.message ?? message;
    detail = doc.detail ?? null;
  } catch {
    // non-JSON failure body; keep the generic message
  }
  throw new ApiError(res.status, code, message, detail);
}

export class StudioApi {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  url(path: string): string {
    return this.baseUrl + path;
  }

  private async getJson<T>(path: string): Promise<{ data: T; hash: string }> {
    const res = await this.fetchImpl(this.url(path));
    if (!res.ok) await parseFailure(res);
    const text = await res.text();
    return { data: JSON.parse(text) as T, hash: fnv1a32(text) };
  }

  private async postJson<T>(
    path: string,
    body: string,
  ): Promise<{ data: T; hash: string }> {
    const res = await this.fetchImpl(this.url(path), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body,
    });
    if (!res.ok) await parseFailure(res);
    const text = await res.text();
    return { data: JSON.parse(text) as T, hash: fnv1a32(text) };
  }

  async health(): Promise<{ status: string; version: string }> {
    return (await this.getJson<{ status: string; version: string }>("/health")).data;
  }

  async uploadCloud(body: ArrayBuffer | Uint8Array | string): Promise<UploadResult> {
    const res = await this.fetchImpl(this.url("/clouds"), {
      method: "POST",
      headers: { "content-type": "application/octet-stream" },
      body: body as BodyInit,
    });
    if (!res.ok) await parseFailure(res);
    return (await res.json()) as UploadResult;
  }

  async getPreview(
    cloudId: string,
    budget?: number,
  ): Promise<{ data: PreviewPayload; hash: string }> {
    const q = budget === undefined ? "" : `?budget=${budget}`;
    return this.getJson<PreviewPayload>(`/clouds/${cloudId}/preview${q}`);
  }

  async validate(cloudId: string, instruction: Instruction): Promise<ValidationReport> {
    const { data } = await this.postJson<ValidationReport>(
      `/clouds/${cloudId}/validate`,
      JSON.stringify(instruction),
    );
    return data;
  }

  /** body is the exact instruction JSON text; keeping the caller's
   * serialization byte-stable makes exported JSON replayable. */
  async synthesizePreview(
    cloudId: string,
    instructionJson: string,
    budget?: number,
  ): Promise<{ data: SynthPreview; hash: string }> {
    const q = budget === undefined ? "" : `&budget=${budget}`;
    return this.postJson<SynthPreview>(
      `/clouds/${cloudId}/synthesize?mode=preview${q}`,
      instructionJson,
    );
  }

  async synthesizeCommit(
    cloudId: string,
    instructionJson: string,
  ): Promise<CommitResult> {
    const { data } = await this.postJson<CommitResult>(
      `/clouds/${cloudId}/synthesize?mode=commit`,
      instructionJson,
    );
    return data;
  }

  async download(path: string): Promise<ArrayBuffer> {
    const res = await this.fetchImpl(this.url(path));
    if (!res.ok) await parseFailure(res);
    return res.arrayBuffer();
  }
}

/** Keeps at most one preview request observable: responses of
 * superseded requests resolve to null instead of overwriting newer
 * state. */
export class PreviewGate {
  private token = 0;

  async run<T>(task: () => Promise<T>): Promise<T | null> {
    const mine = ++this.token;
    const result = await task();
    return mine === this.token ? result : null;
  }
}
