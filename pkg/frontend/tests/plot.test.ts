import { describe, expect, it } from "vitest";
import { axisTicks, spectrumPlot } from "../src/plot.js";

const AREA = { width: 720, height: 320 };

describe("spectrumPlot", () => {
  it("passes server values through untouched", () => {
    const values = [0.0, 6.547586704250769, 3.25, 0.5];
    const spectrum = { frequencies: [200, 400, 600, 800], values };
    const model = spectrumPlot(spectrum, AREA);
    expect(model.points.map((p) => p.value)).toEqual(values);
    expect(model.points.map((p) => p.frequencyHz)).toEqual(spectrum.frequencies);
  });

  it("spans the plot area exactly", () => {
    const spectrum = { frequencies: [100, 200, 300], values: [0, 10, 5] };
    const model = spectrumPlot(spectrum, AREA);
    expect(model.points[0].x).toBe(0);
    expect(model.points[2].x).toBe(AREA.width);
    expect(model.points[1].y).toBe(0); // the maximum sits at the top
    expect(model.points[0].y).toBe(AREA.height);
  });

  it("emits one MoveTo and then LineTos", () => {
    const spectrum = { frequencies: [100, 200, 300], values: [1, 2, 3] };
    const { path } = spectrumPlot(spectrum, AREA);
    expect(path.startsWith("M")).toBe(true);
    expect(path.match(/M/g)).toHaveLength(1);
    expect(path.match(/L/g)).toHaveLength(2);
  });

  it("survives a flat spectrum without dividing by zero", () => {
    const spectrum = { frequencies: [100, 200], values: [0, 0] };
    const model = spectrumPlot(spectrum, AREA);
    for (const p of model.points) {
      expect(Number.isFinite(p.y)).toBe(true);
    }
  });

  it("rejects an empty spectrum", () => {
    expect(() => spectrumPlot({ frequencies: [], values: [] }, AREA)).toThrow(RangeError);
  });
});

describe("axisTicks", () => {
  it("chooses round steps", () => {
    expect(axisTicks(200, 1500, 8)).toEqual([200, 400, 600, 800, 1000, 1200, 1400]);
  });

  it("covers the endpoints when they are round", () => {
    const ticks = axisTicks(0, 100, 6);
    expect(ticks[0]).toBe(0);
    expect(ticks[ticks.length - 1]).toBe(100);
  });

  it("degenerates gracefully", () => {
    expect(axisTicks(5, 5, 4)).toEqual([5]);
  });
});
