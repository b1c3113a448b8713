// Controller behavior: the in-flight lock, error banners, finished state.
import { test } from "node:test";
import assert from "node:assert/strict";

import { SessionApi, ApiError } from "../dist/api.js";
import { SessionController } from "../dist/controller.js";
import { FixtureTransport, loadFixture, renderSpy } from "./helpers.js";

const fixture = loadFixture("session_tictactoe.json");
const created = fixture.exchanges[0];

function controllerWith(transport) {
  const render = renderSpy();
  const controller = new SessionController(new SessionApi(transport), render);
  return { controller, render };
}

test("rapid double-click sends exactly one request", async () => {
  let resolveStep;
  let posts = 0;
  const transport = {
    post(path, body) {
      if (path === "/sessions") {
        return Promise.resolve(created.response);
      }
      posts += 1;
      return new Promise((resolve) => { resolveStep = resolve; });
    },
    get() { throw new Error("unused"); },
  };
  const { controller } = controllerWith(transport);
  await controller.start(created.request);

  const first = controller.play(3);
  const second = controller.play(3); // pressed while the first is in flight
  assert.equal(await second, false);
  assert.equal(posts, 1);

  const stepResponse = fixture.exchanges[1].response;
  resolveStep(stepResponse);
  assert.equal(await first, true);
  assert.equal(posts, 1);
  assert.equal(controller.current.runningSuccess, stepResponse.running_success);
});

test("buttons are reported busy while a request is in flight", async () => {
  let resolveStep;
  const transport = {
    post(path) {
      if (path === "/sessions") {
        return Promise.resolve(created.response);
      }
      return new Promise((resolve) => { resolveStep = resolve; });
    },
    get() { throw new Error("unused"); },
  };
  const { controller, render } = controllerWith(transport);
  await controller.start(created.request);
  const pending = controller.play(0);
  assert.equal(render.last().busy, true);
  resolveStep(fixture.exchanges[1].response);
  await pending;
  assert.equal(render.last().busy, false);
});

test("structured server errors land in the banner, state intact", async () => {
  const transport = {
    post(path) {
      if (path === "/sessions") {
        return Promise.resolve(created.response);
      }
      return Promise.reject(new ApiError("action_out_of_range", "bad action", 400));
    },
    get() { throw new Error("unused"); },
  };
  const { controller } = controllerWith(transport);
  await controller.start(created.request);
  assert.equal(await controller.play(42), false);
  assert.match(controller.current.error, /action_out_of_range/);
  assert.equal(controller.current.runningSuccess, created.response.running_success);
});

test("network failure on start surfaces a retry banner path", async () => {
  const transport = {
    post() { return Promise.reject(new TypeError("fetch failed")); },
    get() { throw new Error("unused"); },
  };
  const { controller, render } = controllerWith(transport);
  await assert.rejects(controller.start(created.request));
  assert.equal(controller.current, null);
  assert.equal(render.last().model, null);
  assert.equal(render.last().busy, false);
});

test("plays on a finished session are dropped without a request", async () => {
  const transport = new FixtureTransport(fixture.exchanges);
  const { controller } = controllerWith(transport);
  await controller.start(fixture.exchanges[0].request);
  for (const exchange of fixture.exchanges.slice(1)) {
    if (!exchange.path.endsWith("/actions")) {
      break;
    }
    await controller.play(exchange.request.action);
  }
  assert.equal(controller.current.status, "finished");
  const before = transport.consumed;
  assert.equal(await controller.play(0), false);
  assert.equal(transport.consumed, before);
});
