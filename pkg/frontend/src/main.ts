// Browser bootstrap: DOM wiring for the operator console.

import { Timings } from "./protocol.js";
import { drawScene } from "./render.js";
import { SessionStore } from "./store.js";
import { connectStore } from "./wire.js";

const store = new SessionStore();

const statusEl = document.getElementById("status") as HTMLSpanElement;
const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const input = document.getElementById("command") as HTMLInputElement;
const form = document.getElementById("command-form") as HTMLFormElement;
const historyEl = document.getElementById("history") as HTMLUListElement;
const candidatesEl = document.getElementById("candidates") as HTMLDivElement;
const resetButton = document.getElementById("reset") as HTMLButtonElement;
const serverInput = document.getElementById("server") as HTMLInputElement;
const connectButton = document.getElementById("connect") as HTMLButtonElement;

function defaultServer(): string {
  const host = location.hostname || "127.0.0.1";
  return `ws://${host}:8766`;
}
serverInput.value = defaultServer();

let retryTimer: number | undefined;

function connect(): void {
  window.clearTimeout(retryTimer);
  const socket = new WebSocket(serverInput.value);
  connectStore(store, socket);
}

connectButton.addEventListener("click", connect);

form.addEventListener("submit", (event) => {
  event.preventDefault();
  store.submit(input.value);
  input.value = "";
});

resetButton.addEventListener("click", () => store.resetScene());

function formatTimings(entry: { timings: Timings }): string {
  const parts: string[] = [];
  for (const key of ["stt_ms", "ttc_ms", "exec_ms", "total_ms"] as const) {
    const value = entry.timings[key];
    if (value !== undefined) parts.push(`${key.replace("_ms", "")} ${value.toFixed(1)}ms`);
  }
  return parts.join(" - ");
}

function render(): void {
  statusEl.textContent = store.status;
  statusEl.className = `status ${store.status}`;
  input.disabled = store.busy;

  if (store.snapshot) {
    drawScene(ctx, store.snapshot, canvas.width, canvas.height);
  }

  historyEl.replaceChildren(
    ...store.history
      .slice()
      .reverse()
      .map((entry) => {
        const li = document.createElement("li");
        li.className = entry.kind;
        const headline =
          entry.kind === "mapped" || entry.kind === "executed"
            ? `${entry.command ?? ""}${entry.score !== null ? ` (${entry.score.toFixed(3)})` : ""}`
            : entry.detail;
        li.textContent = `» ${entry.input}\n${headline}`;
        const timing = formatTimings(entry);
        if (timing) {
          const small = document.createElement("small");
          small.textContent = timing;
          li.append(document.createElement("br"), small);
        }
        return li;
      }),
  );

  if (store.candidates) {
    candidatesEl.hidden = false;
    candidatesEl.replaceChildren(
      Object.assign(document.createElement("p"), {
        textContent: "Low confidence - pick the intended command:",
      }),
      ...store.candidates.map((candidate) => {
        const button = document.createElement("button");
        button.textContent = `${candidate.command} (${candidate.score.toFixed(3)})`;
        button.addEventListener("click", () => store.chooseCandidate(candidate.command));
        return button;
      }),
    );
  } else {
    candidatesEl.hidden = true;
    candidatesEl.replaceChildren();
  }

  if (store.status === "disconnected" && retryTimer === undefined) {
    retryTimer = window.setTimeout(() => {
      retryTimer = undefined;
      connect();
    }, 2000);
  }
}

store.onChange(render);
render();
connect();
