// Pure derivation of what the screen shows from what the server said.
// Every number displayed is a server-reported value; the client never
// recomputes rewards, outcomes or success.

import type {
  FinishSummaryJson,
  GameEventJson,
  ObservationJson,
  SessionSummaryJson,
  StepResultJson,
} from "./api.js";

export interface EventFeedEntry {
  gameNumber: number;
  outcome: GameEventJson["outcome"];
  lengthSteps: number;
}

export interface SessionViewModel {
  sessionId: string;
  status: "active" | "finished";
  actionCount: number;
  observation: ObservationJson;
  runningSuccess: number;
  runningSuccessExact: string;
  gamesDone: number;
  gamesTotal: number;
  stepsRemainingInGame: number;
  events: EventFeedEntry[];
  revealAvailable: boolean;
  decodedView: unknown;
  summary: FinishSummaryJson | null;
  error: string | null;
}

export function fromSummary(summary: SessionSummaryJson): SessionViewModel {
  return {
    sessionId: summary.session_id,
    status: summary.status,
    actionCount: summary.action_count,
    observation: summary.observation,
    runningSuccess: summary.running_success,
    runningSuccessExact: summary.running_success_exact,
    gamesDone: summary.games_done,
    gamesTotal: summary.games_total,
    stepsRemainingInGame: summary.steps_remaining_in_game,
    events: [],
    revealAvailable: summary.reveal,
    decodedView: null,
    summary: null,
    error: null,
  };
}

export function applyStep(model: SessionViewModel, step: StepResultJson): SessionViewModel {
  const events = step.game_event
    ? [...model.events, {
        gameNumber: step.games_done,
        outcome: step.game_event.outcome,
        lengthSteps: step.game_event.length_steps,
      }]
    : model.events;
  return {
    ...model,
    status: step.status,
    observation: step.observation,
    runningSuccess: step.running_success,
    runningSuccessExact: step.running_success_exact,
    gamesDone: step.games_done,
    gamesTotal: step.games_total,
    stepsRemainingInGame: step.steps_remaining_in_game,
    events,
    error: null,
  };
}

export function applyFinish(model: SessionViewModel, summary: FinishSummaryJson): SessionViewModel {
  return { ...model, status: "finished", summary, error: null };
}

export function withDecodedView(model: SessionViewModel, decoded: unknown): SessionViewModel {
  return { ...model, decodedView: decoded };
}

export function withError(model: SessionViewModel, message: string): SessionViewModel {
  return { ...model, error: message };
}
