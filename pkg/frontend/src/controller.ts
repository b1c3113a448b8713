// Session flow: start, one action per button press, reveal, finish.
//
// A single in-flight request per session is enforced here: while one
// action is pending, further plays are dropped before any request is
// sent, so a double-click can never double-step (the server would reject
// the overlap anyway; this keeps the UI honest too).

import { ApiError, SessionApi, type CreateSessionRequest } from "./api.js";
import {
  applyFinish,
  applyStep,
  fromSummary,
  withDecodedView,
  withError,
  type SessionViewModel,
} from "./viewmodel.js";

export type Renderer = (model: SessionViewModel | null, busy: boolean) => void;

function describeError(error: unknown): string {
  if (error instanceof ApiError) {
    return `${error.code}: ${error.message}`;
  }
  return "server unreachable - retry";
}

export class SessionController {
  private model: SessionViewModel | null = null;
  private inFlight = false;

  constructor(private readonly api: SessionApi, private readonly render: Renderer) {}

  get current(): SessionViewModel | null {
    return this.model;
  }

  get busy(): boolean {
    return this.inFlight;
  }

  private paint(): void {
    this.render(this.model, this.inFlight);
  }

  async start(request: CreateSessionRequest): Promise<void> {
    this.inFlight = true;
    this.paint();
    try {
      const summary = await this.api.createSession(request);
      this.model = fromSummary(summary);
    } catch (error) {
      this.model = this.model ? withError(this.model, describeError(error)) : null;
      if (this.model === null) {
        this.render(null, false);
        this.inFlight = false;
        throw error;
      }
    } finally {
      this.inFlight = false;
      this.paint();
    }
  }

  /** One big step; returns false when the press was dropped (in flight or
   * session not active). */
  async play(action: number): Promise<boolean> {
    if (this.inFlight || !this.model || this.model.status !== "active") {
      return false;
    }
    this.inFlight = true;
    this.paint();
    try {
      const step = await this.api.postAction(this.model.sessionId, action);
      this.model = applyStep(this.model, step);
      return true;
    } catch (error) {
      this.model = withError(this.model, describeError(error));
      return false;
    } finally {
      this.inFlight = false;
      this.paint();
    }
  }

  async refreshDecodedView(): Promise<void> {
    if (!this.model) {
      return;
    }
    try {
      const state = await this.api.getSession(this.model.sessionId);
      this.model = withDecodedView(this.model, state.decoded_view);
    } catch (error) {
      this.model = withError(this.model, describeError(error));
    }
    this.paint();
  }

  async finish(): Promise<void> {
    if (!this.model || this.inFlight) {
      return;
    }
    this.inFlight = true;
    this.paint();
    try {
      const summary = await this.api.finishSession(this.model.sessionId);
      this.model = applyFinish(this.model, summary);
    } catch (error) {
      this.model = withError(this.model, describeError(error));
    } finally {
      this.inFlight = false;
      this.paint();
    }
  }
}
