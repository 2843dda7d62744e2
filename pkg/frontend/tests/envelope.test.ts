import { describe, expect, it } from "vitest";
import { EnvelopeEditor } from "../src/envelope.js";

describe("EnvelopeEditor", () => {
  it("starts as identity and omits identity tracks from the wire shape", () => {
    const editor = new EnvelopeEditor();
    expect(editor.toDocument()).toBeUndefined();
  });

  it("keeps points sorted and deduplicates by time", () => {
    const editor = new EnvelopeEditor();
    editor.setGain(0.05, 0.0);
    editor.setGain(0.02, 0.5);
    editor.setGain(0.05, 0.25); // replaces the first point at t=0.05
    expect(editor.gain.map((p) => p.t)).toEqual([0, 0.02, 0.05]);
    expect(editor.gain.map((p) => p.v)).toEqual([1, 0.5, 0.25]);
  });

  it("serializes edited tracks as [t, v] pairs", () => {
    const editor = new EnvelopeEditor();
    editor.setGain(0.05, 0.0);
    editor.setPitchRatio(0.1, 2.0);
    expect(editor.toDocument()).toEqual({
      gain: [
        [0, 1],
        [0.05, 0],
      ],
      pitch_ratio: [
        [0, 1],
        [0.1, 2],
      ],
    });
  });

  it("clamps negative gain to zero and rejects bad points", () => {
    const editor = new EnvelopeEditor();
    editor.setGain(0.1, -3);
    expect(editor.gain[1].v).toBe(0);
    expect(() => editor.setGain(-1, 0.5)).toThrow(RangeError);
    expect(() => editor.setPitchRatio(0.1, 0)).toThrow(RangeError);
    expect(() => editor.setGain(NaN, 1)).toThrow(RangeError);
  });

  it("removing the last explicit point falls back to identity", () => {
    const editor = new EnvelopeEditor();
    editor.setGain(0.05, 0.0);
    editor.removeGain(0.05);
    editor.removeGain(0); // cannot empty the track
    expect(editor.gain).toEqual([{ t: 0, v: 1 }]);
    expect(editor.toDocument()).toBeUndefined();
  });

  it("reset restores both tracks", () => {
    const editor = new EnvelopeEditor();
    editor.setGain(0.05, 0.0);
    editor.setPitchRatio(0.2, 0.5);
    editor.reset();
    expect(editor.toDocument()).toBeUndefined();
  });
});
