// Start screen wiring: choose a world, create the session, play.

import { HttpTransport, SessionApi, type CreateSessionRequest } from "./api.js";
import { SessionController } from "./controller.js";
import { createDomRenderer } from "./render.js";

const WORLD_CHOICES: Record<string, CreateSessionRequest["world"]> = {
  "tic-tac-toe vs minimax": { world: "tictactoe", opponent: "minimax" },
  "tic-tac-toe vs random": { world: "tictactoe", opponent: "uniform_random" },
  "bit prediction (random)": { world: "bitstream", stream: "random" },
  "bit prediction (alternating)": { world: "bitstream", stream: "alternating" },
  "oscillating world": { world: "oscillating" },
};

function start(): void {
  const app = document.querySelector<HTMLElement>("#app");
  if (!app) {
    throw new Error("missing #app mount point");
  }
  app.innerHTML = `
    <h1>live a test life</h1>
    <p class="intro">Pick a world, act one step at a time on raw observations,
    and get scored by the same Success function the machine agents face.</p>
    <div id="start-screen">
      <label>world <select id="world-choice"></select></label>
      <label>seed <input id="seed" type="number" value="1"></label>
      <button id="start-button">start session</button>
      <div id="start-banner" class="banner hidden"></div>
    </div>
    <div id="session-root"></div>
  `;
  const select = app.querySelector<HTMLSelectElement>("#world-choice")!;
  for (const name of Object.keys(WORLD_CHOICES)) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    select.appendChild(option);
  }

  const baseUrl = new URLSearchParams(location.search).get("server")
    ?? `${location.protocol}//${location.host}`;
  const api = new SessionApi(new HttpTransport(baseUrl));
  const sessionRoot = app.querySelector<HTMLElement>("#session-root")!;
  const controller: SessionController = new SessionController(api, (model, busy) =>
    renderer(model, busy));
  const renderer = createDomRenderer(sessionRoot, {
    onAction: (action) => void controller.play(action),
    onReveal: () => void controller.refreshDecodedView(),
    onFinish: () => void controller.finish(),
  });

  const startBanner = app.querySelector<HTMLElement>("#start-banner")!;
  app.querySelector<HTMLButtonElement>("#start-button")!.addEventListener("click", () => {
    const world = WORLD_CHOICES[select.value];
    const seed = Number(app.querySelector<HTMLInputElement>("#seed")!.value) || 0;
    startBanner.classList.add("hidden");
    controller.start({ world, seed }).catch((error) => {
      startBanner.textContent = `could not reach the session service (${String(error)}) - retry`;
      startBanner.classList.remove("hidden");
    });
  });
}

start();
