// Typed client for the annotation service. Every mutating UI action maps
// to exactly one call here, so conflicts are never masked by batching.

import type {
  AliasResponse,
  AnnotationResponse,
  ClassifyResponse,
  ClusterListResponse,
  ClusterResponse,
  Decision,
  ListQuery,
  ReportResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    const body = await response.text();
    if (!response.ok) {
      let detail = body;
      try {
        detail = (JSON.parse(body) as { detail?: string }).detail ?? body;
      } catch {
        // keep raw body
      }
      throw new ApiError(response.status, detail);
    }
    return JSON.parse(body) as T;
  }

  listClusters(query: ListQuery = {}): Promise<ClusterListResponse> {
    const params = new URLSearchParams();
    if (query.status) params.set("status", query.status);
    if (query.sort) params.set("sort", query.sort);
    if (query.page) params.set("page", String(query.page));
    if (query.page_size) params.set("page_size", String(query.page_size));
    const qs = params.toString();
    return this.request<ClusterListResponse>(`/clusters${qs ? `?${qs}` : ""}`);
  }

  getCluster(clusterId: number): Promise<ClusterResponse> {
    return this.request<ClusterResponse>(`/clusters/${clusterId}`);
  }

  annotate(
    clusterId: number,
    decision: Decision,
    label?: string,
    version?: number,
  ): Promise<AnnotationResponse> {
    return this.request<AnnotationResponse>(`/clusters/${clusterId}/annotation`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ decision, label, version }),
    });
  }

  classify(text: string): Promise<ClassifyResponse> {
    return this.request<ClassifyResponse>("/classify", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  report(): Promise<ReportResponse> {
    return this.request<ReportResponse>("/run/report");
  }

  aliases(): Promise<AliasResponse> {
    return this.request<AliasResponse>("/aliases");
  }
}
