/** Thin REST client for the annotation service; identity is a bearer token. */

import type { ExportResponse, QueueResponse, SubmissionRecord } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public invariant: string | null,
    detail: string,
  ) {
    super(detail);
  }
}

export class WorkbenchClient {
  constructor(
    private baseUrl: string,
    private token: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private headers(): Record<string, string> {
    return {
      Authorization: `Bearer ${this.token}`,
      "Content-Type": "application/json",
    };
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await res.text();
    const payload = text ? JSON.parse(text) : {};
    if (!res.ok) {
      throw new ApiError(res.status, payload.invariant ?? null, payload.detail ?? res.statusText);
    }
    return payload as T;
  }

  nextExample(): Promise<QueueResponse> {
    return this.request<QueueResponse>("GET", "/api/queue/next");
  }

  submit(record: SubmissionRecord): Promise<{ seq: number }> {
    return this.request<{ seq: number }>("POST", "/api/annotations", record);
  }

  skip(questionId: string, reason: string): Promise<{ seq: number }> {
    return this.request<{ seq: number }>("POST", "/api/skips", {
      question_id: questionId,
      reason,
    });
  }

  exportDataset(): Promise<ExportResponse> {
    return this.request<ExportResponse>("GET", "/api/export");
  }

  health(): Promise<{ status: string }> {
    return this.request<{ status: string }>("GET", "/api/health");
  }
}
