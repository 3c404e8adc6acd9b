import { describe, expect, it } from "vitest";

import {
  alternativesToCandidates,
  decodeEnvelope,
  encodeEnvelope,
  isRawCommandId,
} from "../src/protocol.js";

describe("envelope codec", () => {
  it("round-trips an envelope", () => {
    const envelope = { type: "map_text", id: "c1", payload: { text: "grab them" } };
    expect(decodeEnvelope(encodeEnvelope(envelope))).toEqual(envelope);
  });

  it("defaults id and payload", () => {
    const decoded = decodeEnvelope('{"type":"pong"}');
    expect(decoded.id).toBeNull();
    expect(decoded.payload).toEqual({});
  });

  it("rejects non-envelopes", () => {
    expect(() => decodeEnvelope("[1,2,3]")).toThrow();
    expect(() => decodeEnvelope('{"id":"x"}')).toThrow();
  });
});

describe("raw command detection", () => {
  it("accepts canonical ids", () => {
    expect(isRawCommandId("select(cube, red)")).toBe(true);
    expect(isRawCommandId("arrange(circle)")).toBe(true);
    expect(isRawCommandId("  grab(sphere) ")).toBe(true);
  });

  it("keeps natural language on the mapping path", () => {
    expect(isRawCommandId("select all red boxes")).toBe(false);
    expect(isRawCommandId("drop")).toBe(false); // bare words are speech
    expect(isRawCommandId("select(cube")).toBe(false);
  });
});

describe("alternatives", () => {
  it("converts pair lists", () => {
    const candidates = alternativesToCandidates([
      ["drop", 0.31],
      ["grab", 0.22],
    ]);
    expect(candidates).toEqual([
      { command: "drop", score: 0.31 },
      { command: "grab", score: 0.22 },
    ]);
  });

  it("tolerates junk", () => {
    expect(alternativesToCandidates(null)).toEqual([]);
    expect(alternativesToCandidates([["x"], "y"])).toEqual([]);
  });
});
