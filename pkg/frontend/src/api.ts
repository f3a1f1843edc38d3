/**
 * Thin typed client for the prediction service. All network access in the
 * UI funnels through here; the fetch implementation is injectable so tests
 * can run without a server.
 */

import type {
  CourseInfo,
  DatasetInfo,
  ScaleInfo,
  WhatIfRequest,
  WhatIfResponse,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ServiceError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

const defaultFetch: FetchLike = (url, init) => fetch(url, init);

export class AdvisorClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = defaultFetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ServiceError(0, `service unreachable: ${String(err)}`);
    }
    const text = await response.text();
    let body: unknown = null;
    if (text) {
      try {
        body = JSON.parse(text);
      } catch {
        body = null;
      }
    }
    if (!response.ok) {
      const detail =
        body !== null && typeof body === "object" && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : text || `HTTP ${response.status}`;
      throw new ServiceError(response.status, detail);
    }
    return body as T;
  }

  courses(): Promise<{ dataset_id: string; courses: CourseInfo[] }> {
    return this.request("/courses");
  }

  async datasets(): Promise<{ datasets: DatasetInfo[]; current: string | null }> {
    return this.request("/datasets");
  }

  /** The grade scale of the dataset the service is currently serving. */
  async currentScale(): Promise<ScaleInfo> {
    const listing = await this.datasets();
    const current = listing.datasets.find((d) => d.current);
    if (!current) {
      throw new ServiceError(503, "no dataset loaded on the service");
    }
    return current.scale;
  }

  whatif(req: WhatIfRequest): Promise<WhatIfResponse> {
    return this.request("/whatif", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
  }
}
