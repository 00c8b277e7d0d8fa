// Thin typed client for the hop runtime service. Every request is appended
// to an audit log so tests can prove the editor only writes on explicit save.

import type { ModelDoc, MotionDoc, PreviewResponse } from "./motion.js";

export interface RequestRecord {
  method: string;
  path: string;
  status: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    /** Raw response body, shown to the user verbatim for 409/422. */
    readonly body: string,
    method: string,
    path: string,
  ) {
    super(`${method} ${path} -> ${status}: ${body}`);
    this.name = "ApiError";
  }
}

export interface MotionListing {
  name: string;
  modified_ns: number;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class MotionApi {
  readonly log: RequestRecord[] = [];
  private readonly fetchImpl: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchImpl?: FetchLike,
  ) {
    // Bind so the client works with the global fetch in browsers and node.
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request(
    method: string,
    path: string,
    init: RequestInit = {},
  ): Promise<Response> {
    const resp = await this.fetchImpl(this.baseUrl + path, { ...init, method });
    this.log.push({ method, path, status: resp.status });
    return resp;
  }

  private async okOrThrow(resp: Response, method: string, path: string): Promise<Response> {
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text(), method, path);
    }
    return resp;
  }

  async listMotions(): Promise<MotionListing[]> {
    const resp = await this.okOrThrow(await this.request("GET", "/motions"), "GET", "/motions");
    const body = (await resp.json()) as { motions: MotionListing[] };
    return body.motions;
  }

  /** Returns the stored document plus its ETag for later If-Match saves. */
  async getMotion(name: string): Promise<{ doc: MotionDoc; etag: string }> {
    const path = `/motions/${name}`;
    const resp = await this.okOrThrow(await this.request("GET", path), "GET", path);
    const etag = resp.headers.get("ETag");
    if (etag === null) throw new Error(`missing ETag on ${path}`);
    return { doc: (await resp.json()) as MotionDoc, etag };
  }

  async getModel(): Promise<ModelDoc> {
    const resp = await this.okOrThrow(await this.request("GET", "/model"), "GET", "/model");
    return (await resp.json()) as ModelDoc;
  }

  /**
   * Writes a motion. With an etag the write is conditional and a stale etag
   * raises ApiError(409); without one it overwrites unconditionally.
   */
  async putMotion(name: string, doc: MotionDoc, etag?: string): Promise<string> {
    const path = `/motions/${name}`;
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (etag !== undefined) headers["If-Match"] = etag;
    const resp = await this.okOrThrow(
      await this.request("PUT", path, { headers, body: JSON.stringify(doc) }),
      "PUT",
      path,
    );
    const newTag = resp.headers.get("ETag");
    if (newTag === null) throw new Error(`missing ETag on PUT ${path}`);
    await resp.text(); // drain so keep-alive connections can be reused
    return newTag;
  }

  /** Interpolated frame plus link transforms for the (possibly unsaved) document. */
  async preview(doc: MotionDoc, t: number): Promise<PreviewResponse> {
    const resp = await this.okOrThrow(
      await this.request("POST", "/preview", {
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ motion: doc, t }),
      }),
      "POST",
      "/preview",
    );
    return (await resp.json()) as PreviewResponse;
  }

  /**
   * Runs a stored motion through the simulator and yields the CSV log as
   * decoded text chunks in arrival order.
   */
  async *simulateStream(
    name: string,
    seed = 0,
    duration?: number,
  ): AsyncGenerator<string, void, void> {
    const body: Record<string, unknown> = { motion: name, seed };
    if (duration !== undefined) body.duration = duration;
    const resp = await this.okOrThrow(
      await this.request("POST", "/simulate", {
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      }),
      "POST",
      "/simulate",
    );
    if (resp.body === null) throw new Error("simulate response has no body");
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      yield decoder.decode(value, { stream: true });
    }
    const tail = decoder.decode();
    if (tail.length > 0) yield tail;
  }
}
