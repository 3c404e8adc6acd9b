// Session state machine: one in-flight command, append-only history, and a
// snapshot that only ever changes in response to a server message.

import {
  Candidate,
  Envelope,
  Snapshot,
  Timings,
  alternativesToCandidates,
  decodeEnvelope,
  encodeEnvelope,
  isRawCommandId,
} from "./protocol.js";

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

export interface Wire {
  send(line: string): void;
  close(): void;
}

export interface HistoryEntry {
  input: string;
  kind: "mapped" | "executed" | "low_confidence" | "error" | "info";
  command: string | null;
  score: number | null;
  timings: Timings;
  detail: string;
}

type PendingKind = "hello" | "scene" | "command" | "candidate";

interface PendingRequest {
  kind: PendingKind;
  input: string;
}

export class SessionStore {
  status: ConnectionStatus = "disconnected";
  snapshot: Snapshot | null = null;
  history: HistoryEntry[] = [];
  candidates: Candidate[] | null = null;
  pendingInput: string | null = null;

  private wire: Wire | null = null;
  private nextId = 0;
  private inFlight = new Map<string, PendingRequest>();
  private listeners: Array<() => void> = [];

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  get busy(): boolean {
    return this.pendingInput !== null || this.status !== "connected";
  }

  // -- wire lifecycle --------------------------------------------------------

  attachWire(wire: Wire): void {
    this.wire = wire;
    this.status = "connecting";
    this.emit();
  }

  handleOpen(): void {
    // Liveness first, then populate the view; history survives reconnects.
    this.request("ping", {}, { kind: "hello", input: "" });
    this.request("scene_get", {}, { kind: "scene", input: "" });
    this.emit();
  }

  handleClose(): void {
    this.status = "disconnected";
    this.wire = null;
    this.pendingInput = null;
    this.inFlight.clear();
    this.emit();
  }

  handleLine(line: string): void {
    let envelope: Envelope;
    try {
      envelope = decodeEnvelope(line);
    } catch {
      return;
    }
    const pending = envelope.id === null ? undefined : this.inFlight.get(envelope.id);
    if (envelope.id !== null) this.inFlight.delete(envelope.id);
    this.applyResponse(envelope, pending);
    this.emit();
  }

  // -- user actions ----------------------------------------------------------

  submit(text: string): void {
    const trimmed = text.trim();
    if (!trimmed || this.busy || this.wire === null) return;
    this.candidates = null;
    this.pendingInput = trimmed;
    if (isRawCommandId(trimmed)) {
      this.request("execute", { command: trimmed }, { kind: "command", input: trimmed });
    } else {
      this.request("map_and_execute", { text: trimmed }, { kind: "command", input: trimmed });
    }
    this.emit();
  }

  chooseCandidate(command: string): void {
    if (this.busy || this.wire === null) return;
    this.candidates = null;
    this.pendingInput = command;
    this.request("execute", { command }, { kind: "candidate", input: command });
    this.emit();
  }

  resetScene(n = 96, seed = 0): void {
    if (this.busy || this.wire === null) return;
    this.pendingInput = `reset(${n}, ${seed})`;
    this.request("scene_reset", { n, seed }, { kind: "command", input: `reset ${n}/${seed}` });
    this.emit();
  }

  // -- internals ---------------------------------------------------------------

  private request(
    type: string,
    payload: Record<string, unknown>,
    pending: PendingRequest,
  ): void {
    const id = `c${++this.nextId}`;
    this.inFlight.set(id, pending);
    this.wire!.send(encodeEnvelope({ type, id, payload }));
  }

  private applyResponse(envelope: Envelope, pending?: PendingRequest): void {
    const payload = envelope.payload as Record<string, any>;
    switch (envelope.type) {
      case "pong":
        this.status = "connected";
        return;
      case "mapping": {
        if (payload.snapshot) this.snapshot = payload.snapshot as Snapshot;
        this.finishCommand(pending, {
          kind: "mapped",
          command: (payload.command as string) ?? null,
          score: (payload.score as number) ?? null,
          timings: (payload.timings as Timings) ?? {},
          detail: payload.transcript ? `heard: ${payload.transcript}` : "",
        });
        return;
      }
      case "snapshot": {
        this.snapshot = payload.snapshot as Snapshot;
        if (pending && pending.kind !== "scene") {
          this.finishCommand(pending, {
            kind: "executed",
            command: pending.input,
            score: null,
            timings: (payload.timings as Timings) ?? {},
            detail: "",
          });
        }
        return;
      }
      case "candidates":
        this.finishCommand(pending, {
          kind: "info",
          command: null,
          score: null,
          timings: (payload.timings as Timings) ?? {},
          detail: `${(payload.candidates ?? []).length} candidates`,
        });
        return;
      case "error": {
        const code = String(payload.code ?? "internal");
        if (code === "low_confidence") {
          this.candidates = alternativesToCandidates(payload.alternatives).slice(0, 5);
          this.finishCommand(pending, {
            kind: "low_confidence",
            command: null,
            score: (payload.mapping?.score as number) ?? null,
            timings: (payload.mapping?.timings as Timings) ?? {},
            detail: String(payload.message ?? ""),
          });
        } else {
          this.finishCommand(pending, {
            kind: "error",
            command: null,
            score: null,
            timings: {},
            detail: `${code}: ${String(payload.message ?? "")}`,
          });
        }
        return;
      }
      default:
        return;
    }
  }

  private finishCommand(
    pending: PendingRequest | undefined,
    entry: Omit<HistoryEntry, "input">,
  ): void {
    if (!pending || pending.kind === "hello" || pending.kind === "scene") return;
    this.pendingInput = null;
    this.history.push({ input: pending.input, ...entry });
  }
}
