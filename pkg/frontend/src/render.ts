// DOM renderer: everything on screen is read off the view model, which in
// turn only holds server-reported values.

import type { SessionViewModel } from "./viewmodel.js";

const SIGNAL_LABEL: Record<string, string> = {
  N: "", W: "WIN", L: "LOSS", D: "DRAW",
};

export interface RendererHooks {
  onAction(action: number): void;
  onReveal(): void;
  onFinish(): void;
}

export function createDomRenderer(root: HTMLElement, hooks: RendererHooks) {
  root.innerHTML = `
    <div id="banner" class="banner hidden"></div>
    <div id="stats" class="stats"></div>
    <div id="gauge" class="gauge"><div id="gauge-fill" class="gauge-fill"></div>
      <span id="gauge-label"></span></div>
    <div id="observation" class="observation"></div>
    <div id="actions" class="actions"></div>
    <div id="decoded" class="decoded hidden"></div>
    <div class="controls">
      <button id="reveal-toggle" class="hidden">reveal decoded view</button>
      <button id="finish">finish session</button>
    </div>
    <ul id="events" class="events"></ul>
    <div id="summary" class="summary hidden"></div>
  `;
  const el = (id: string) => root.querySelector<HTMLElement>(`#${id}`)!;
  el("reveal-toggle").addEventListener("click", () => hooks.onReveal());
  el("finish").addEventListener("click", () => hooks.onFinish());

  let actionButtons: HTMLButtonElement[] = [];

  function ensureActionButtons(count: number, disabled: boolean): void {
    const container = el("actions");
    if (actionButtons.length !== count) {
      container.innerHTML = "";
      actionButtons = [];
      for (let a = 0; a < count; a += 1) {
        const button = document.createElement("button");
        button.textContent = String(a);
        button.className = "action-button";
        button.addEventListener("click", () => hooks.onAction(a));
        container.appendChild(button);
        actionButtons.push(button);
      }
    }
    for (const button of actionButtons) {
      button.disabled = disabled;
    }
  }

  return function render(model: SessionViewModel | null, busy: boolean): void {
    const banner = el("banner");
    if (model?.error) {
      banner.textContent = model.error;
      banner.classList.remove("hidden");
    } else {
      banner.classList.add("hidden");
    }
    if (!model) {
      return;
    }
    ensureActionButtons(model.actionCount, busy || model.status !== "active");

    el("stats").textContent =
      `game ${Math.min(model.gamesDone + 1, model.gamesTotal)} of ${model.gamesTotal}`
      + ` | steps left in game: ${model.stepsRemainingInGame}`;

    const fill = el("gauge-fill");
    fill.style.width = `${(model.runningSuccess * 100).toFixed(1)}%`;
    el("gauge-label").textContent =
      `success ${model.runningSuccess.toFixed(4)} (${model.runningSuccessExact})`;

    const signal = SIGNAL_LABEL[model.observation.signal];
    el("observation").textContent =
      `observation: symbol ${model.observation.symbol}${signal ? " - " + signal : ""}`;

    const reveal = el("reveal-toggle");
    reveal.classList.toggle("hidden", !model.revealAvailable);
    const decoded = el("decoded");
    if (model.decodedView != null) {
      decoded.classList.remove("hidden");
      decoded.textContent = Array.isArray(model.decodedView)
        ? (model.decodedView as unknown[]).map((row) =>
            Array.isArray(row) ? (row as unknown[]).join(" ") : String(row)).join("\n")
        : String(model.decodedView);
    } else {
      decoded.classList.add("hidden");
    }

    const events = el("events");
    events.innerHTML = "";
    for (const event of model.events) {
      const item = document.createElement("li");
      item.textContent = `game ${event.gameNumber}: ${event.outcome}`
        + ` (${event.lengthSteps} steps)`;
      events.appendChild(item);
    }

    const summary = el("summary");
    if (model.summary) {
      summary.classList.remove("hidden");
      summary.innerHTML = "";
      const headline = document.createElement("p");
      headline.textContent = `final success ${model.summary.success.toFixed(4)}`
        + ` (${model.summary.success_exact})`;
      const baselines = document.createElement("p");
      baselines.textContent =
        `baselines on this world+seed - random: ${model.summary.baselines.random.toFixed(4)},`
        + ` dead: ${model.summary.baselines.dead.toFixed(4)}`;
      summary.append(headline, baselines);
    } else {
      summary.classList.add("hidden");
    }
  };
}
