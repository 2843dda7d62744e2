import { describe, expect, it } from "vitest";
import { parseSpectrumCsv } from "../src/csv.js";

const GOOD = "frequency_hz,value\n200.0,6.5\n202.5,6.25\n205.0,0.0\n";

describe("parseSpectrumCsv", () => {
  it("parses header plus rows", () => {
    const spectrum = parseSpectrumCsv(GOOD);
    expect(spectrum.frequencies).toEqual([200.0, 202.5, 205.0]);
    expect(spectrum.values).toEqual([6.5, 6.25, 0.0]);
  });

  it("preserves full float precision", () => {
    const value = 6.547586704250769;
    const spectrum = parseSpectrumCsv(`frequency_hz,value\n857.5,${value}\n`);
    expect(spectrum.values[0]).toBe(value);
  });

  it("accepts CRLF and trailing blank lines", () => {
    const spectrum = parseSpectrumCsv("frequency_hz,value\r\n100,1\r\n\r\n");
    expect(spectrum.frequencies).toEqual([100]);
  });

  it("rejects a wrong header with its line number", () => {
    expect(() => parseSpectrumCsv("freq,db\n100,1\n")).toThrow(/line 1/);
  });

  it("rejects a short row with its line number", () => {
    expect(() => parseSpectrumCsv("frequency_hz,value\n100\n")).toThrow(/line 2/);
  });

  it("rejects non-numeric cells", () => {
    expect(() => parseSpectrumCsv("frequency_hz,value\n100,loud\n")).toThrow(/line 2/);
  });

  it("rejects an empty table", () => {
    expect(() => parseSpectrumCsv("frequency_hz,value\n")).toThrow(/empty/);
  });
});
