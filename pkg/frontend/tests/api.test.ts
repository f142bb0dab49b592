import { describe, expect, it } from "vitest";

import { ApiError, PreviewGate, StudioApi } from "../src/api.js";
import { fnv1a32 } from "../src/hash.js";

interface Call {
  url: string;
  init?: RequestInit;
}

function fakeFetch(
  handler: (url: string, init?: RequestInit) => Response,
): { calls: Call[]; fetch: (url: string, init?: RequestInit) => Promise<Response> } {
  const calls: Call[] = [];
  return {
    calls,
    fetch: async (url, init) => {
      calls.push({ url, init });
      return handler(url, init);
    },
  };
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("StudioApi", () => {
  it("prefixes the base URL", async () => {
    const f = fakeFetch(() => jsonResponse({ status: "ok", version: "x" }));
    const api = new StudioApi("http://h:9", f.fetch);
    await api.health();
    expect(f.calls[0].url).toBe("http://h:9/health");
  });

  it("uploads raw bytes as octet-stream", async () => {
    const f = fakeFetch(() =>
      jsonResponse({ id: "c1", point_count: 5, bounds: [[0, 0, 0], [1, 1, 1]] }),
    );
    const api = new StudioApi("", f.fetch);
    const res = await api.uploadCloud("ply text");
    expect(res.id).toBe("c1");
    expect(f.calls[0].url).toBe("/clouds");
    expect(f.calls[0].init?.method).toBe("POST");
    const headers = f.calls[0].init?.headers as Record<string, string>;
    expect(headers["content-type"]).toBe("application/octet-stream");
  });

  it("passes the preview budget through and hashes the body", async () => {
    const payload = {
      id: "c1",
      total: 10,
      count: 2,
      positions: [[0, 0, 0], [1, 1, 1]],
      source_indices: [0, 5],
      mask: null,
    };
    const f = fakeFetch(() => jsonResponse(payload));
    const api = new StudioApi("", f.fetch);
    const got = await api.getPreview("c1", 500);
    expect(f.calls[0].url).toBe("/clouds/c1/preview?budget=500");
    expect(got.data.count).toBe(2);
    expect(got.hash).toBe(fnv1a32(JSON.stringify(payload)));
  });

  it("omits the budget parameter when unset", async () => {
    const f = fakeFetch(() =>
      jsonResponse({ id: "c1", total: 1, count: 1, positions: [[0, 0, 0]], source_indices: [0], mask: null }),
    );
    const api = new StudioApi("", f.fetch);
    await api.getPreview("c1");
    expect(f.calls[0].url).toBe("/clouds/c1/preview");
  });

  it("sends the exact exported JSON text on synthesize", async () => {
    const f = fakeFetch(() =>
      jsonResponse({
        id: null,
        total: 10,
        count: 2,
        positions: [[0, 0, 0], [1, 1, 1]],
        source_indices: [0, 1],
        mask: [0, 1],
        masked: 3,
        provenance: {},
      }),
    );
    const api = new StudioApi("", f.fetch);
    const text = '{\n  "schema_version": 1\n}';
    await api.synthesizePreview("c1", text, 800);
    expect(f.calls[0].url).toBe("/clouds/c1/synthesize?mode=preview&budget=800");
    expect(f.calls[0].init?.body).toBe(text);
  });

  it("commits through mode=commit", async () => {
    const f = fakeFetch(() =>
      jsonResponse({
        id: "c2",
        point_count: 9,
        masked: 3,
        links: { download: "/clouds/c2/download", preview: "/clouds/c2/preview" },
        provenance: {},
      }),
    );
    const api = new StudioApi("", f.fetch);
    const res = await api.synthesizeCommit("c1", "{}");
    expect(f.calls[0].url).toBe("/clouds/c1/synthesize?mode=commit");
    expect(res.links.download).toBe("/clouds/c2/download");
  });

  it("raises ApiError with the service envelope", async () => {
    const f = fakeFetch(() =>
      jsonResponse(
        { code: "validation_error", message: "rejected", detail: { n: 1 } },
        422,
      ),
    );
    const api = new StudioApi("", f.fetch);
    const err = await api.health().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(err.code).toBe("validation_error");
    expect(err.message).toBe("rejected");
    expect(err.detail).toEqual({ n: 1 });
  });

  it("copes with non-JSON error bodies", async () => {
    const f = fakeFetch(() => new Response("boom", { status: 502 }));
    const api = new StudioApi("", f.fetch);
    const err = await api.health().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(502);
    expect(err.code).toBe("http_error");
  });

  it("downloads artifact bytes", async () => {
    const f = fakeFetch(() => new Response(new Uint8Array([112, 108, 121])));
    const api = new StudioApi("", f.fetch);
    const buf = await api.download("/clouds/c2/download");
    expect(new Uint8Array(buf)).toEqual(new Uint8Array([112, 108, 121]));
  });
});

describe("fnv1a32", () => {
  it("is stable and 8 hex chars", () => {
    expect(fnv1a32("")).toBe("811c9dc5");
    expect(fnv1a32("abc")).toBe(fnv1a32("abc"));
    expect(fnv1a32("abc")).not.toBe(fnv1a32("abd"));
    expect(fnv1a32("abc")).toMatch(/^[0-9a-f]{8}$/);
  });
});

describe("PreviewGate", () => {
  it("returns the result when uncontested", async () => {
    const gate = new PreviewGate();
    expect(await gate.run(async () => 42)).toBe(42);
  });

  it("nulls out a superseded request", async () => {
    const gate = new PreviewGate();
    let releaseFirst!: () => void;
    const first = gate.run(
      () =>
        new Promise<string>((resolve) => {
          releaseFirst = () => resolve("stale");
        }),
    );
    const second = gate.run(async () => "fresh");
    expect(await second).toBe("fresh");
    releaseFirst();
    expect(await first).toBeNull();
  });
});
