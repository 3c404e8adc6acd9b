// End-to-end console loop against a live gateway: the two signature scene
// commands update the rendered view, and gibberish opens the candidate panel.

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { WebSocket } from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { SessionStore } from "../src/store.js";
import { connectStore, WebSocketLike } from "../src/wire.js";
import { buildRenderModel } from "../src/render.js";

const repoRoot = resolve(dirname(fileURLToPath(import.meta.url)), "..", "..");
const corpus = join(repoRoot, "src", "voicegate", "data", "corpus.ndjson");

let workDir: string;
let server: ChildProcess | undefined;
let wsUrl: string;

async function waitFor(check: () => boolean, what: string, timeoutMs = 15000): Promise<void> {
  const start = Date.now();
  while (!check()) {
    if (Date.now() - start > timeoutMs) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 25));
  }
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "voicegate-console-"));
  const indexPath = join(workDir, "index.vgx");
  const build = spawnSync(
    "python3",
    ["-m", "voicegate.cli", "build-index", "--corpus", corpus, "--out", indexPath],
    { encoding: "utf-8" },
  );
  if (build.status !== 0) {
    throw new Error(`build-index failed: ${build.stderr}`);
  }

  server = spawn(
    "python3",
    ["-m", "voicegate.cli", "serve", "--index", indexPath, "--port", "0", "--ws-port", "0"],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let stdout = "";
  server.stdout!.on("data", (chunk) => (stdout += String(chunk)));
  await waitFor(() => /websocket bridge on ws:\/\/[\d.]+:\d+/.test(stdout), "server startup");
  wsUrl = stdout.match(/websocket bridge on (ws:\/\/[\d.]+:\d+)/)![1];
}, 60000);

afterAll(() => {
  server?.kill();
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

describe("console loop against a live server", () => {
  it("drives the grab/put flow and the low-confidence panel", async () => {
    const store = new SessionStore();
    const socket = new WebSocket(wsUrl) as unknown as WebSocketLike;
    connectStore(store, socket);
    await waitFor(() => store.status === "connected" && store.snapshot !== null, "connect");

    store.resetScene(96, 7);
    await waitFor(() => !store.busy && store.snapshot!.objects.length === 96, "reset");
    const base = store.history.length; // the reset is itself a history entry
    const cylinders = new Set(
      store.snapshot!.objects.filter((o) => o.shape === "cylinder").map((o) => o.id),
    );
    expect(cylinders.size).toBeGreaterThan(0);

    // One round trip: grab lifts every cylinder.
    store.submit("grab all the cylinders");
    await waitFor(() => store.history.length === base + 1, "grab response");
    expect(store.history[base].kind).toBe("mapped");
    expect(store.history[base].command).toBe("grab(cylinder)");
    const held = new Set(store.snapshot!.objects.filter((o) => o.held).map((o) => o.id));
    expect(held).toEqual(cylinders);

    // Second round trip: the cylinders land on the ring.
    store.submit("put them in the circle");
    await waitFor(() => store.history.length === base + 2, "put response");
    expect(store.history[base + 1].command).toBe("arrange(circle)");
    const snapshot = store.snapshot!;
    const [ax, ay] = snapshot.anchor;
    const radii = snapshot.objects
      .filter((o) => cylinders.has(o.id))
      .map((o) => Math.hypot(o.pos[0] - ax, o.pos[1] - ay));
    expect(Math.max(...radii) - Math.min(...radii)).toBeLessThan(1e-9);

    // The rendered object set mirrors the snapshot exactly.
    const model = buildRenderModel(snapshot, 860, 560);
    expect(model.items.map((i) => i.id)).toEqual(snapshot.objects.map((o) => o.id));

    // Gibberish opens the candidate panel with five entries.
    store.submit("zzqq vv xx");
    await waitFor(() => store.history.length === base + 3, "gibberish response");
    expect(store.history[base + 2].kind).toBe("low_confidence");
    expect(store.candidates).toHaveLength(5);

    // Picking a candidate executes it directly.
    store.chooseCandidate(store.candidates![0].command);
    await waitFor(() => store.history.length === base + 4, "candidate execution");
    expect(["executed", "error"]).toContain(store.history[base + 3].kind);

    // Raw command ids bypass mapping.
    store.submit("select(cube, red)");
    await waitFor(() => store.history.length === base + 5, "raw id execution");
    expect(store.history[base + 4].kind).toBe("executed");
    const selected = store.snapshot!.objects.filter((o) => o.selected);
    expect(selected.every((o) => o.shape === "cube" && o.color === "red")).toBe(true);

    socket.close();
  }, 60000);
});
