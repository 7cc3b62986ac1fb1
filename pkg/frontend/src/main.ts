import { TypeaheadController } from "./controller.js";
import type { Generator, Ranking, Scorer, UiState } from "./state.js";

const input = document.getElementById("query") as HTMLInputElement;
const list = document.getElementById("suggestions") as HTMLUListElement;
const latencyEl = document.getElementById("latency") as HTMLSpanElement;
const errorEl = document.getElementById("error") as HTMLDivElement;
const healthEl = document.getElementById("health") as HTMLSpanElement;
const generatorSel = document.getElementById("generator") as HTMLSelectElement;
const rankingSel = document.getElementById("ranking") as HTMLSelectElement;
const scorerSel = document.getElementById("scorer") as HTMLSelectElement;

function render(state: UiState): void {
  list.replaceChildren();
  state.suggestions.forEach((cand, i) => {
    const li = document.createElement("li");
    li.className = i === state.selected ? "selected" : "";

    const text = document.createElement("span");
    text.className = "text";
    text.textContent = cand.text;
    li.appendChild(text);

    const badge = document.createElement("span");
    badge.className = `badge ${cand.source}`;
    badge.textContent = cand.source;
    li.appendChild(badge);

    const meta = document.createElement("span");
    meta.className = "meta";
    meta.textContent = cand.score !== undefined
      ? `f=${cand.frequency} s=${cand.score.toFixed(2)}`
      : `f=${cand.frequency}`;
    li.appendChild(meta);

    li.addEventListener("mousedown", (ev) => {
      ev.preventDefault();
      controller.choose(i);
      input.value = controller.state.input;
    });
    list.appendChild(li);
  });

  latencyEl.textContent = state.latency
    ? `gen ${state.latency.gen_us} us, rank ${state.latency.rank_us} us`
    : "";
  errorEl.textContent = state.error ?? "";
  errorEl.hidden = state.error === null;
}

const controller = new TypeaheadController({ onRender: render });

// The input must not trim: a trailing space marks the last word complete
// and changes what the generators return.
input.addEventListener("input", () => controller.setInput(input.value));

input.addEventListener("keydown", (ev) => {
  if (ev.key === "ArrowDown") {
    ev.preventDefault();
    controller.moveSelection(1);
  } else if (ev.key === "ArrowUp") {
    ev.preventDefault();
    controller.moveSelection(-1);
  } else if (ev.key === "Enter") {
    controller.confirmSelection();
    input.value = controller.state.input;
  } else if (ev.key === "Escape") {
    controller.setInput("");
    input.value = "";
  }
});

for (const sel of [generatorSel, rankingSel, scorerSel]) {
  sel.addEventListener("change", () => {
    controller.setConfig({
      generator: generatorSel.value as Generator,
      ranking: rankingSel.value as Ranking,
      scorer: scorerSel.value as Scorer,
    });
  });
}

fetch("/health")
  .then((r) => r.json())
  .then((body) => {
    healthEl.textContent = body.model_loaded
      ? "service up, model loaded"
      : "service up, no model (frequency ranking only)";
  })
  .catch(() => {
    healthEl.textContent = "service unreachable";
  });
