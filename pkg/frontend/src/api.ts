// Typed session/1 payloads and the transport seam.
//
// The client computes no game logic: these shapes are read from the wire
// and rendered as-is.

export interface ObservationJson {
  symbol: number;
  signal: "N" | "W" | "L" | "D";
}

export interface GameEventJson {
  outcome: "Win" | "Loss" | "Draw" | "TimeoutDraw";
  length_steps: number;
}

export interface SessionSummaryJson {
  schema: string;
  session_id: string;
  status: "active" | "finished";
  world: { world: string; [key: string]: unknown };
  action_count: number;
  observation: ObservationJson;
  games_total: number;
  games_done: number;
  max_steps_per_game: number;
  steps_remaining_in_game: number;
  running_success: number;
  running_success_exact: string;
  reveal: boolean;
}

export interface StepResultJson {
  schema: string;
  session_id: string;
  observation: ObservationJson;
  game_event: GameEventJson | null;
  running_success: number;
  running_success_exact: string;
  games_done: number;
  games_total: number;
  steps_remaining_in_game: number;
  status: "active" | "finished";
}

export interface SessionStateJson extends SessionSummaryJson {
  history: { action: number; observation: ObservationJson }[];
  games: GameEventJson[];
  decoded_view: unknown;
}

export interface FinishSummaryJson {
  schema: string;
  session_id: string;
  success: number;
  success_exact: string;
  games: GameEventJson[];
  baselines: { random: number; dead: number };
}

export interface ApiErrorJson {
  code: string;
  message: string;
}

export class ApiError extends Error {
  constructor(readonly code: string, message: string, readonly status: number) {
    super(message);
  }
}

export interface CreateSessionRequest {
  world: { world: string; [key: string]: unknown };
  games?: number;
  max_steps_per_game?: number;
  seed?: number;
}

/** Transport seam: the browser uses fetch, tests use recorded fixtures. */
export interface Transport {
  post(path: string, body: unknown): Promise<unknown>;
  get(path: string): Promise<unknown>;
}

export class HttpTransport implements Transport {
  constructor(private readonly baseUrl: string) {}

  private async send(path: string, init: RequestInit): Promise<unknown> {
    const response = await fetch(this.baseUrl + path, init);
    const body = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      const code = typeof body.code === "string" ? body.code : "http_error";
      const message = typeof body.message === "string" ? body.message : response.statusText;
      throw new ApiError(code, message, response.status);
    }
    return body;
  }

  post(path: string, body: unknown): Promise<unknown> {
    return this.send(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  get(path: string): Promise<unknown> {
    return this.send(path, { method: "GET" });
  }
}

export class SessionApi {
  constructor(private readonly transport: Transport) {}

  createSession(request: CreateSessionRequest): Promise<SessionSummaryJson> {
    return this.transport.post("/sessions", request) as Promise<SessionSummaryJson>;
  }

  postAction(sessionId: string, action: number): Promise<StepResultJson> {
    return this.transport.post(`/sessions/${sessionId}/actions`, { action }) as
      Promise<StepResultJson>;
  }

  getSession(sessionId: string): Promise<SessionStateJson> {
    return this.transport.get(`/sessions/${sessionId}`) as Promise<SessionStateJson>;
  }

  finishSession(sessionId: string): Promise<FinishSummaryJson> {
    return this.transport.post(`/sessions/${sessionId}/finish`, {}) as
      Promise<FinishSummaryJson>;
  }
}
