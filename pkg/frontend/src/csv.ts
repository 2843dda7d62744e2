/** Parser for the service's spectrum CSV (header: frequency_hz,value). */

export interface Spectrum {
  frequencies: number[];
  values: number[];
}

export function parseSpectrumCsv(text: string): Spectrum {
  const lines = text.split("\n").map((line) => line.replace(/\r$/, ""));
  let lineNo = 0;
  while (lineNo < lines.length && lines[lineNo].trim() === "") {
    lineNo += 1;
  }
  if (lineNo >= lines.length || lines[lineNo] !== "frequency_hz,value") {
    throw new Error(`line ${lineNo + 1}: expected header "frequency_hz,value"`);
  }
  const frequencies: number[] = [];
  const values: number[] = [];
  for (lineNo += 1; lineNo < lines.length; lineNo += 1) {
    const line = lines[lineNo];
    if (line.trim() === "") {
      continue;
    }
    const parts = line.split(",");
    if (parts.length !== 2) {
      throw new Error(`line ${lineNo + 1}: expected 2 columns, got ${parts.length}`);
    }
    const f = Number(parts[0]);
    const v = Number(parts[1]);
    if (!Number.isFinite(f) || !Number.isFinite(v)) {
      throw new Error(`line ${lineNo + 1}: not a number`);
    }
    frequencies.push(f);
    values.push(v);
  }
  if (frequencies.length === 0) {
    throw new Error("spectrum table is empty");
  }
  return { frequencies, values };
}
