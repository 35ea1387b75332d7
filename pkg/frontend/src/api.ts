/** Thin typed client over the session service's HTTP API. */

import type {
  FeedbackRequest,
  FeedbackResponse,
  HealthView,
  RecommendationResponse,
  SessionMode,
  SessionSnapshot,
  TopsPage,
} from "./types.js";

/** Error carrying the service's structured {code, message} body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<ApiError> {
  let code = "unknown";
  let message = `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    if (typeof body.code === "string") code = body.code;
    if (typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the fallback
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<HealthView> {
    return this.request<HealthView>("/healthz");
  }

  tops(offset = 0, limit = 24): Promise<TopsPage> {
    return this.request<TopsPage>(`/catalog/tops?offset=${offset}&limit=${limit}`);
  }

  startSession(
    topId: string,
    mode: SessionMode,
    userTag?: string,
  ): Promise<RecommendationResponse> {
    const body: { top_id: string; mode: SessionMode; user_tag?: string } = {
      top_id: topId,
      mode,
    };
    if (userTag !== undefined) body.user_tag = userTag;
    return this.post<RecommendationResponse>("/sessions", body);
  }

  sendFeedback(sessionId: string, body: FeedbackRequest): Promise<FeedbackResponse> {
    return this.post<FeedbackResponse>(`/sessions/${sessionId}/feedback`, body);
  }

  snapshot(sessionId: string): Promise<SessionSnapshot> {
    return this.request<SessionSnapshot>(`/sessions/${sessionId}`);
  }
}
