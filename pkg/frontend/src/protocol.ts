// Wire envelopes for the gateway's newline-delimited JSON protocol.

export interface Envelope {
  type: string;
  id: string | null;
  payload: Record<string, unknown>;
}

export interface SceneObjectView {
  id: number;
  shape: string;
  color: string;
  pos: [number, number, number];
  selected: boolean;
  held: boolean;
}

export interface Snapshot {
  objects: SceneObjectView[];
  box: { center: [number, number]; size: [number, number, number] };
  anchor: [number, number];
  pile: [number, number];
}

export interface Timings {
  stt_ms?: number;
  ttc_ms?: number;
  exec_ms?: number;
  total_ms?: number;
}

export interface Candidate {
  command: string;
  score: number;
}

export function encodeEnvelope(env: Envelope): string {
  return JSON.stringify({ type: env.type, id: env.id, payload: env.payload });
}

export function decodeEnvelope(line: string): Envelope {
  const raw = JSON.parse(line);
  if (typeof raw !== "object" || raw === null || typeof raw.type !== "string") {
    throw new Error("envelope must be an object with a string 'type'");
  }
  return {
    type: raw.type,
    id: raw.id ?? null,
    payload: (raw.payload as Record<string, unknown>) ?? {},
  };
}

// Power-user input like "select(cube, red)" executes directly instead of
// going through mapping. Bare words stay on the natural-language path.
const RAW_ID = /^[a-z][a-z0-9]*\s*\(\s*[a-z][a-z0-9]*\s*(,\s*[a-z][a-z0-9]*\s*)?\)$/;

export function isRawCommandId(text: string): boolean {
  return RAW_ID.test(text.trim());
}

export function alternativesToCandidates(raw: unknown): Candidate[] {
  if (!Array.isArray(raw)) return [];
  return raw
    .filter((pair) => Array.isArray(pair) && pair.length === 2)
    .map((pair) => ({ command: String(pair[0]), score: Number(pair[1]) }));
}
