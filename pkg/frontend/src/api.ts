import type {
  AnnotationView,
  DecisionBody,
  DocumentSummary,
  DocumentView,
  RevisionStats,
} from "./types.js";

export class ApiError extends Error {
  constructor(message: string, readonly status: number | null = null) {
    super(message);
  }
}

/** Thin typed client over the /api endpoints. */
export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.base + path, init);
    } catch (err) {
      throw new ApiError(`network failure: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(detail, response.status);
    }
    return (await response.json()) as T;
  }

  documents(): Promise<DocumentSummary[]> {
    return this.request("/api/documents");
  }

  document(docId: string): Promise<DocumentView> {
    return this.request(`/api/documents/${encodeURIComponent(docId)}`);
  }

  queue(status?: string): Promise<AnnotationView[]> {
    const suffix = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.request(`/api/queue${suffix}`);
  }

  decide(body: DecisionBody): Promise<AnnotationView> {
    return this.request("/api/decisions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  stats(): Promise<RevisionStats> {
    return this.request("/api/stats");
  }
}
