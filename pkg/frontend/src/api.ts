/** Typed client for the finrag HTTP JSON API (the UI's only backend coupling). */

export interface EvidenceItem {
  doc_id: string;
  granularity: string;
  key_text: string;
  payload: string;
  score: number;
}

export interface ChatResponse {
  response: string;
  evidence: EvidenceItem[];
  turn: number;
}

export interface TranscriptTurn {
  query: string;
  response: string;
}

export interface SessionTranscript {
  session_id: string;
  turns: TranscriptTurn[];
}

export interface BacktestRequest {
  scenario?: string;
  predictions_path?: string;
  prices_path?: string;
  benchmark_path?: string;
  rf?: number;
  from_month?: string;
  to_month?: string;
}

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
    public readonly kind: string = "ApiError",
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let kind = "ApiError";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { error?: string; message?: string };
    if (body.message) message = body.message;
    if (body.error) kind = body.error;
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(message, response.status, kind);
}

export class ApiClient {
  constructor(
    public readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  chat(sessionId: string, query: string): Promise<ChatResponse> {
    return this.post<ChatResponse>("/api/chat", { session_id: sessionId, query });
  }

  fetchSession(sessionId: string): Promise<SessionTranscript> {
    return this.request<SessionTranscript>(
      `/api/session?session_id=${encodeURIComponent(sessionId)}`,
    );
  }

  resetSession(sessionId: string): Promise<{ session_id: string; turns: number }> {
    return this.post("/api/session/reset", { session_id: sessionId });
  }

  retrieve(query: string, k = 1): Promise<{ hits: EvidenceItem[] }> {
    return this.request(`/api/retrieve?q=${encodeURIComponent(query)}&k=${k}`);
  }

  backtest(request: BacktestRequest): Promise<unknown> {
    return this.post("/api/backtest", request);
  }

  health(): Promise<{ status: string }> {
    return this.request("/api/health");
  }

  async equityCurve(runId: string): Promise<string> {
    const response = await this.fetchFn(
      `${this.baseUrl}/api/equity-curve?run=${encodeURIComponent(runId)}`,
    );
    if (!response.ok) {
      throw await parseError(response);
    }
    return response.text();
  }
}
