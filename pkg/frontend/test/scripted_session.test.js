// End-to-end scripted session against recorded live-service exchanges: a
// full nine-game Tic-Tac-Toe life, every displayed number equal to the
// server's, reveal view fetched, final summary with baselines.
import { test } from "node:test";
import assert from "node:assert/strict";

import { SessionApi } from "../dist/api.js";
import { SessionController } from "../dist/controller.js";
import { FixtureTransport, loadFixture, renderSpy } from "./helpers.js";

const fixture = loadFixture("session_tictactoe.json");

test("scripted nine-game session replays the recorded life exactly", async () => {
  const transport = new FixtureTransport(fixture.exchanges);
  const render = renderSpy();
  const controller = new SessionController(new SessionApi(transport), render);

  const createExchange = fixture.exchanges[0];
  await controller.start(createExchange.request);
  assert.equal(controller.current.gamesTotal, 9);
  assert.equal(controller.current.actionCount, 9);

  for (const exchange of fixture.exchanges.slice(1)) {
    if (exchange.method === "POST" && exchange.path.endsWith("/actions")) {
      const applied = await controller.play(exchange.request.action);
      assert.equal(applied, true);
      // the gauge and counters show the server's values, nothing else
      assert.equal(controller.current.runningSuccess,
        exchange.response.running_success);
      assert.equal(controller.current.runningSuccessExact,
        exchange.response.running_success_exact);
      assert.equal(controller.current.gamesDone, exchange.response.games_done);
    } else if (exchange.method === "GET") {
      await controller.refreshDecodedView();
      assert.deepEqual(controller.current.decodedView,
        exchange.response.decoded_view);
    } else {
      await controller.finish();
    }
  }

  assert.equal(transport.exchanges.length, 0, "every recorded exchange replayed");
  const model = controller.current;
  assert.equal(model.status, "finished");
  assert.equal(model.events.length, 9, "nine completed games in the feed");
  assert.equal(model.summary.success, fixture.exchanges.at(-1).response.success);
  assert.deepEqual(model.summary.baselines,
    fixture.exchanges.at(-1).response.baselines);
  assert.ok(render.frames.length >= fixture.exchanges.length,
    "every exchange repainted the screen");
});
