/** Typed client for the session service; every mutation goes through here. */

import type {
  ClassLabel,
  SessionCreateRequest,
  SessionState,
  Snapshot,
} from "./types.js";

export type FetchLike = typeof fetch;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseOrThrow<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = (await res.json()) as { detail?: string };
      if (body.detail) detail = String(body.detail);
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class ApiClient {
  constructor(
    public readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return parseOrThrow<T>(res);
  }

  private async get<T>(path: string): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`);
    return parseOrThrow<T>(res);
  }

  createSession(req: SessionCreateRequest): Promise<{ id: string; state: SessionState }> {
    return this.post("/sessions", req);
  }

  getState(sessionId: string): Promise<SessionState> {
    return this.get(`/sessions/${sessionId}/state`);
  }

  step(sessionId: string, count: number): Promise<{ advanced: number; state: SessionState }> {
    return this.post(`/sessions/${sessionId}/step`, { count });
  }

  setPacing(sessionId: string, rate: number): Promise<{ pacing: number }> {
    return this.post(`/sessions/${sessionId}/pacing`, { rate });
  }

  submitLabel(
    sessionId: string,
    sampleId: number,
    label: ClassLabel,
  ): Promise<{ state: SessionState }> {
    return this.post(`/sessions/${sessionId}/label`, {
      sample_id: sampleId,
      label,
    });
  }

  skipQuery(sessionId: string, sampleId: number): Promise<{ state: SessionState }> {
    return this.post(`/sessions/${sessionId}/label`, {
      sample_id: sampleId,
      skip: true,
    });
  }

  getSnapshot(sessionId: string): Promise<Snapshot> {
    return this.get(`/sessions/${sessionId}/snapshot`);
  }
}
