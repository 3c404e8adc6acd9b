import { describe, expect, it } from "vitest";

import { Snapshot } from "../src/protocol.js";
import { SessionStore, Wire } from "../src/store.js";

class FakeWire implements Wire {
  sent: Array<{ type: string; id: string; payload: Record<string, unknown> }> = [];
  send(line: string): void {
    this.sent.push(JSON.parse(line));
  }
  close(): void {}
  last() {
    return this.sent[this.sent.length - 1];
  }
}

function snapshotDoc(held: number[] = []): Snapshot {
  return {
    objects: [
      { id: 0, shape: "cube", color: "red", pos: [0, 0, 0], selected: false, held: held.includes(0) },
      { id: 1, shape: "sphere", color: "blue", pos: [0.2, 0.1, 0], selected: true, held: held.includes(1) },
    ],
    box: { center: [1, 0], size: [1, 1, 1] },
    anchor: [-2, 0],
    pile: [0, 0],
  };
}

function openStore(): { store: SessionStore; wire: FakeWire } {
  const store = new SessionStore();
  const wire = new FakeWire();
  store.attachWire(wire);
  store.handleOpen();
  const ping = wire.sent[0];
  const sceneGet = wire.sent[1];
  expect(ping.type).toBe("ping");
  expect(sceneGet.type).toBe("scene_get");
  store.handleLine(JSON.stringify({ type: "pong", id: ping.id, payload: {} }));
  store.handleLine(
    JSON.stringify({ type: "snapshot", id: sceneGet.id, payload: { snapshot: snapshotDoc() } }),
  );
  return { store, wire };
}

describe("session store", () => {
  it("connects via ping/pong and populates the view", () => {
    const { store } = openStore();
    expect(store.status).toBe("connected");
    expect(store.snapshot?.objects).toHaveLength(2);
    expect(store.history).toHaveLength(0); // bootstrap traffic is not history
  });

  it("reports disconnected state and keeps history through reconnects", () => {
    const { store, wire } = openStore();
    store.submit("drop them");
    store.handleLine(
      JSON.stringify({
        type: "mapping",
        id: wire.last().id,
        payload: { status: "ok", command: "drop", score: 1, alternatives: [], timings: {} },
      }),
    );
    expect(store.history).toHaveLength(1);
    store.handleClose();
    expect(store.status).toBe("disconnected");
    const wire2 = new FakeWire();
    store.attachWire(wire2);
    store.handleOpen();
    expect(store.history).toHaveLength(1); // history survives the reconnect
  });

  it("maps natural language through map_and_execute", () => {
    const { store, wire } = openStore();
    store.submit("grab all the cylinders");
    expect(store.busy).toBe(true);
    const request = wire.last();
    expect(request.type).toBe("map_and_execute");
    expect(request.payload).toEqual({ text: "grab all the cylinders" });

    store.handleLine(
      JSON.stringify({
        type: "mapping",
        id: request.id,
        payload: {
          status: "ok",
          command: "grab(cylinder)",
          score: 0.97,
          alternatives: [["grab(cylinder)", 0.97]],
          timings: { ttc_ms: 2.0, exec_ms: 0.4, total_ms: 2.6 },
          snapshot: snapshotDoc([1]),
        },
      }),
    );
    expect(store.busy).toBe(false);
    expect(store.history).toHaveLength(1);
    const entry = store.history[0];
    expect(entry.kind).toBe("mapped");
    expect(entry.command).toBe("grab(cylinder)");
    expect(entry.timings.total_ms).toBe(2.6);
    expect(store.snapshot?.objects[1].held).toBe(true);
  });

  it("routes raw command ids through execute", () => {
    const { store, wire } = openStore();
    store.submit("select(cube, red)");
    const request = wire.last();
    expect(request.type).toBe("execute");
    expect(request.payload).toEqual({ command: "select(cube, red)" });
    store.handleLine(
      JSON.stringify({
        type: "snapshot",
        id: request.id,
        payload: { snapshot: snapshotDoc(), timings: { exec_ms: 0.2 } },
      }),
    );
    expect(store.history[0].kind).toBe("executed");
  });

  it("rejects input while a command is in flight", () => {
    const { store, wire } = openStore();
    store.submit("grab them");
    const sentBefore = wire.sent.length;
    store.submit("drop them");
    expect(wire.sent.length).toBe(sentBefore);
  });

  it("shows the candidate panel on low confidence and executes the pick", () => {
    const { store, wire } = openStore();
    store.submit("zzqq vv xx");
    const request = wire.last();
    store.handleLine(
      JSON.stringify({
        type: "error",
        id: request.id,
        payload: {
          code: "low_confidence",
          message: "best score 0.0 below threshold 0.35",
          alternatives: [
            ["arrange(circle)", 0.1],
            ["arrange(matrix)", 0.09],
            ["arrange(row)", 0.08],
            ["drop", 0.07],
            ["grab", 0.06],
          ],
          mapping: { status: "low_confidence", score: 0.1, timings: { ttc_ms: 1.0 } },
        },
      }),
    );
    expect(store.candidates).toHaveLength(5);
    expect(store.history[0].kind).toBe("low_confidence");

    store.chooseCandidate("arrange(circle)");
    const executeRequest = wire.last();
    expect(executeRequest.type).toBe("execute");
    expect(store.candidates).toBeNull();
    store.handleLine(
      JSON.stringify({
        type: "snapshot",
        id: executeRequest.id,
        payload: { snapshot: snapshotDoc(), timings: { exec_ms: 0.1 } },
      }),
    );
    expect(store.history[1].kind).toBe("executed");
    expect(store.history[1].input).toBe("arrange(circle)");
  });

  it("records server errors without breaking the session", () => {
    const { store, wire } = openStore();
    store.submit("select(dragon)");
    const request = wire.last();
    store.handleLine(
      JSON.stringify({
        type: "error",
        id: request.id,
        payload: { code: "unknown_command", message: "command not in catalog" },
      }),
    );
    expect(store.history[0].kind).toBe("error");
    expect(store.busy).toBe(false);
    store.submit("drop them");
    expect(wire.last().type).toBe("map_and_execute");
  });

  it("never mutates the snapshot locally", () => {
    const { store, wire } = openStore();
    const before = JSON.stringify(store.snapshot);
    store.submit("grab them");
    expect(JSON.stringify(store.snapshot)).toBe(before); // unchanged until reply
    const request = wire.last();
    store.handleLine(
      JSON.stringify({
        type: "mapping",
        id: request.id,
        payload: { status: "ok", command: "grab", score: 1, alternatives: [], timings: {} },
      }),
    );
    // mapping without a snapshot leaves the view untouched
    expect(JSON.stringify(store.snapshot)).toBe(before);
  });
});
