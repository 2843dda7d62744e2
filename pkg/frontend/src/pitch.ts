/** Scientific pitch notation, parsed client-side; the server only sees MIDI. */

const LETTER_SEMITONES: Record<string, number> = {
  C: 0, D: 2, E: 4, F: 5, G: 7, A: 9, B: 11,
};

const NOTE_RE = /^([A-Ga-g])([#b]?)(-?\d+)$/;

/** "C5" -> 72, "A4" -> 69, "Bb3" -> 58. Octaves follow C4 = 60. */
export function noteToMidi(name: string): number {
  const match = NOTE_RE.exec(name.trim());
  if (!match) {
    throw new RangeError(`cannot parse note name ${JSON.stringify(name)}`);
  }
  const [, letter, accidental, octaveStr] = match;
  const semitone = LETTER_SEMITONES[letter.toUpperCase()];
  const shift = accidental === "#" ? 1 : accidental === "b" ? -1 : 0;
  const midi = (Number(octaveStr) + 1) * 12 + semitone + shift;
  if (midi < 0 || midi > 127) {
    throw new RangeError(`${name} is outside the MIDI range 0..127`);
  }
  return midi;
}

/** Splits "C5 E5 G5" (spaces or commas) into MIDI numbers. */
export function parseNoteList(text: string): number[] {
  return noteNames(text).map(noteToMidi);
}

export function noteNames(text: string): string[] {
  const names = text.split(/[\s,]+/).filter((part) => part.length > 0);
  if (names.length === 0) {
    throw new RangeError("no note names given");
  }
  return names;
}

export function midiToFrequency(midi: number): number {
  return 440.0 * Math.pow(2.0, (midi - 69) / 12.0);
}

/** Signed distance from reference to found, in cents. */
export function centsBetween(foundHz: number, referenceHz: number): number {
  if (foundHz <= 0 || referenceHz <= 0) {
    throw new RangeError("frequencies must be positive");
  }
  return 1200.0 * Math.log2(foundHz / referenceHz);
}

export function formatCents(cents: number): string {
  const rounded = Math.round(cents * 10) / 10;
  return `${rounded > 0 ? "+" : ""}${rounded.toFixed(1)} ct`;
}
