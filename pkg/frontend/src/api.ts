// Thin typed client over the session service. All program state lives on
// the server; this never caches anything itself.

import type { ScoreJson, SessionPayload } from "./types";

export class StaleRevisionError extends Error {
  currentRevision: number;

  constructor(currentRevision: number) {
    super(`revision conflict; server is at revision ${currentRevision}`);
    this.currentRevision = currentRevision;
  }
}

export class ApiError extends Error {
  status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.status = status;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class SessionClient {
  baseUrl: string;
  private fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (response.status === 409) {
      const body = await response.json().catch(() => ({}));
      const current = body?.detail?.current_revision ?? -1;
      throw new StaleRevisionError(current);
    }
    if (!response.ok) {
      const body = await response.json().catch(() => ({}));
      const detail =
        typeof body?.detail === "string"
          ? body.detail
          : JSON.stringify(body?.detail ?? response.statusText);
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  async createSession(body: {
    block_program: unknown;
    buildings?: Record<string, unknown>;
    prompt?: string;
    seed?: number;
    floor_height?: number;
  }): Promise<SessionPayload> {
    const response = await this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return response.json();
  }

  async getProgram(sessionId: string, revision?: number): Promise<SessionPayload> {
    const query = revision === undefined ? "" : `?revision=${revision}`;
    const response = await this.request(`/sessions/${sessionId}/program${query}`);
    return response.json();
  }

  async getSceneBytes(sessionId: string, revision?: number): Promise<ArrayBuffer> {
    const query = revision === undefined ? "" : `?revision=${revision}`;
    const response = await this.request(`/sessions/${sessionId}/scene.glb${query}`);
    return response.arrayBuffer();
  }

  async getScore(sessionId: string, prompt?: string): Promise<ScoreJson> {
    const query = prompt === undefined ? "" : `?prompt=${encodeURIComponent(prompt)}`;
    const response = await this.request(`/sessions/${sessionId}/score${query}`);
    return response.json();
  }

  async getReport(sessionId: string): Promise<unknown> {
    const response = await this.request(`/sessions/${sessionId}/report`);
    return response.json();
  }

  async submitEdit(
    sessionId: string,
    baseRevision: number,
    command: string,
  ): Promise<SessionPayload> {
    const response = await this.request(`/sessions/${sessionId}/edits`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ base_revision: baseRevision, command }),
    });
    return response.json();
  }
}
