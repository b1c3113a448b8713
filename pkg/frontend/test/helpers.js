// Shared test plumbing: the recorded-fixture transport and a renderer spy.
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ApiError } from "../dist/api.js";

const here = dirname(fileURLToPath(import.meta.url));

export function loadFixture(name) {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf8"));
}

/** Replays recorded exchanges in order and verifies each outgoing request
 * matches what the real client sent when the fixture was recorded. */
export class FixtureTransport {
  constructor(exchanges) {
    this.exchanges = [...exchanges];
    this.consumed = 0;
  }

  #next(method, path, body) {
    const expected = this.exchanges.shift();
    if (!expected) {
      throw new Error(`unexpected ${method} ${path}: fixture exhausted`);
    }
    if (expected.method !== method || expected.path !== path) {
      throw new Error(`request mismatch: got ${method} ${path}, `
        + `fixture has ${expected.method} ${expected.path}`);
    }
    if (method === "POST"
        && JSON.stringify(body ?? {}) !== JSON.stringify(expected.request ?? {})) {
      throw new Error(`body mismatch at ${path}: ${JSON.stringify(body)} `
        + `vs ${JSON.stringify(expected.request)}`);
    }
    this.consumed += 1;
    if (expected.status >= 400) {
      return Promise.reject(new ApiError(expected.response.code,
        expected.response.message, expected.status));
    }
    return Promise.resolve(expected.response);
  }

  post(path, body) {
    return this.#next("POST", path, body);
  }

  get(path) {
    return this.#next("GET", path, undefined);
  }
}

/** Renderer that keeps every (model, busy) frame it was asked to paint. */
export function renderSpy() {
  const frames = [];
  const render = (model, busy) => frames.push({ model, busy });
  render.frames = frames;
  render.last = () => frames[frames.length - 1];
  return render;
}
