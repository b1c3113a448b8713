// The view model is a field-for-field mirror of server payloads: no number
// shown to the human is computed on the client.
import { test } from "node:test";
import assert from "node:assert/strict";

import { applyFinish, applyStep, fromSummary, withError } from "../dist/viewmodel.js";
import { loadFixture } from "./helpers.js";

const fixture = loadFixture("session_tictactoe.json");
const exchanges = fixture.exchanges;
const created = exchanges[0].response;
const steps = exchanges.filter((e) => e.path.endsWith("/actions"));
const finish = exchanges[exchanges.length - 1].response;

test("summary maps server fields verbatim", () => {
  const model = fromSummary(created);
  assert.equal(model.sessionId, created.session_id);
  assert.equal(model.actionCount, created.action_count);
  assert.equal(model.runningSuccess, created.running_success);
  assert.equal(model.runningSuccessExact, created.running_success_exact);
  assert.equal(model.gamesTotal, created.games_total);
  assert.equal(model.stepsRemainingInGame, created.steps_remaining_in_game);
  assert.deepEqual(model.observation, created.observation);
  assert.equal(model.events.length, 0);
  assert.equal(model.summary, null);
});

test("every applied step mirrors the server's numbers exactly", () => {
  let model = fromSummary(created);
  let expectedEvents = 0;
  for (const exchange of steps) {
    model = applyStep(model, exchange.response);
    assert.equal(model.runningSuccess, exchange.response.running_success);
    assert.equal(model.runningSuccessExact, exchange.response.running_success_exact);
    assert.equal(model.gamesDone, exchange.response.games_done);
    assert.deepEqual(model.observation, exchange.response.observation);
    if (exchange.response.game_event) {
      expectedEvents += 1;
      const last = model.events[model.events.length - 1];
      assert.equal(last.outcome, exchange.response.game_event.outcome);
      assert.equal(last.lengthSteps, exchange.response.game_event.length_steps);
    }
    assert.equal(model.events.length, expectedEvents);
  }
  assert.equal(model.status, "finished");
  assert.equal(model.gamesDone, model.gamesTotal);
});

test("finish summary carries server baselines untouched", () => {
  let model = fromSummary(created);
  model = applyFinish(model, finish);
  assert.equal(model.summary.success, finish.success);
  assert.deepEqual(model.summary.baselines, finish.baselines);
  assert.equal(typeof model.summary.baselines.random, "number");
  assert.equal(typeof model.summary.baselines.dead, "number");
});

test("errors never disturb the last good numbers", () => {
  const model = withError(fromSummary(created), "server unreachable - retry");
  assert.equal(model.error, "server unreachable - retry");
  assert.equal(model.runningSuccess, created.running_success);
});
