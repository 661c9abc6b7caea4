/** Thin API client; fetch is injectable so tests can intercept requests. */

import type { ConfigDoc, DefaultsPayload, ExplainResponse,
              StabilityResponse } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  stage: string;

  constructor(stage: string, message: string) {
    super(message);
    this.stage = stage;
  }
}

async function parse<T>(response: Response): Promise<T> {
  let body: unknown;
  try {
    body = await response.json();
  } catch {
    throw new ApiError("transport", `invalid JSON from service (HTTP ${response.status})`);
  }
  const doc = body as { error?: { stage: string; message: string } };
  if (!response.ok || doc.error) {
    const err = doc.error ?? { stage: "http", message: `HTTP ${response.status}` };
    throw new ApiError(err.stage, err.message);
  }
  return body as T;
}

export class ApiClient {
  private fetchImpl: FetchLike;
  private base: string;

  constructor(base = "", fetchImpl?: FetchLike) {
    this.base = base;
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.fetchImpl(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    }).then((response) => parse<T>(response));
  }

  defaults(): Promise<DefaultsPayload> {
    return this.fetchImpl(this.base + "/api/defaults")
      .then((response) => parse<DefaultsPayload>(response));
  }

  explain(config: ConfigDoc, instance: number | (number | string)[],
          seed: number): Promise<ExplainResponse> {
    return this.post<ExplainResponse>("/api/explain",
                                      { config, instance, seed });
  }

  stability(config: ConfigDoc, instance: number | (number | string)[],
            seeds: number, seed: number,
            topK?: number): Promise<StabilityResponse> {
    const body: Record<string, unknown> =
      { config, instance, seeds, seed };
    if (topK !== undefined) body.top_k = topK;
    return this.post<StabilityResponse>("/api/stability", body);
  }
}
