// Thin API client. Each view keys its requests so stale responses
// (superseded by a newer request for the same view) are discarded.

import {
  AttributionPayload,
  DagPayload,
  EvolutionPayload,
  RegionsPayload,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

/** Wrap an async fn so only the most recent call's result is delivered;
 * superseded calls resolve to undefined. */
export function latestOnly<A extends unknown[], R>(
  fn: (...args: A) => Promise<R>,
): (...args: A) => Promise<R | undefined> {
  let seq = 0;
  return async (...args: A) => {
    const mine = ++seq;
    const result = await fn(...args);
    return mine === seq ? result : undefined;
  };
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.base + path);
    if (!response.ok) throw new ApiError(response.status, `GET ${path} -> ${response.status}`);
    return (await response.json()) as T;
  }

  async createSession(body: Record<string, unknown>): Promise<string> {
    const response = await this.fetchImpl(this.base + "/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw new ApiError(response.status, `POST /sessions -> ${response.status}`);
    const payload = (await response.json()) as { session_id: string };
    return payload.session_id;
  }

  regions(session: string): Promise<RegionsPayload> {
    return this.getJson(`/sessions/${session}/regions`);
  }

  evolution(session: string, region: number): Promise<EvolutionPayload> {
    return this.getJson(`/sessions/${session}/regions/${region}/evolution`);
  }

  dag(session: string, region: number, start: number, end: number): Promise<DagPayload> {
    return this.getJson(`/sessions/${session}/regions/${region}/dag?start=${start}&end=${end}`);
  }

  attribution(session: string, region: number, start: number, end: number): Promise<AttributionPayload> {
    return this.getJson(`/sessions/${session}/regions/${region}/attribution?start=${start}&end=${end}`);
  }
}
