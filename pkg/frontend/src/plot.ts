/** Spectrum plotting as pure geometry.
 *
 * The plot is a projection of server numbers onto pixels; no smoothing,
 * resampling, or unit conversion happens here, so the rendered points are
 * exactly the rows of the CSV export.
 */

import { Spectrum } from "./csv.js";

export interface PlotArea {
  width: number;
  height: number;
}

export interface PlotPoint {
  x: number;
  y: number;
  frequencyHz: number;
  /** The server's value, untouched. */
  value: number;
}

export interface PlotModel {
  points: PlotPoint[];
  path: string;
  fMin: number;
  fMax: number;
  vMin: number;
  vMax: number;
}

export function spectrumPlot(spectrum: Spectrum, area: PlotArea): PlotModel {
  const { frequencies, values } = spectrum;
  if (frequencies.length === 0) {
    throw new RangeError("empty spectrum");
  }
  const fMin = frequencies[0];
  const fMax = frequencies[frequencies.length - 1];
  const vMin = Math.min(...values);
  const vMax = Math.max(...values);
  const fSpan = fMax - fMin || 1;
  const vSpan = vMax - vMin || 1;
  const points = frequencies.map((f, i) => ({
    x: ((f - fMin) / fSpan) * area.width,
    y: area.height - ((values[i] - vMin) / vSpan) * area.height,
    frequencyHz: f,
    value: values[i],
  }));
  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(2)},${p.y.toFixed(2)}`)
    .join(" ");
  return { points, path, fMin, fMax, vMin, vMax };
}

/** Round tick positions for an axis, at most `count` of them. */
export function axisTicks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo) || count < 2) {
    return [lo];
  }
  const rawStep = (hi - lo) / (count - 1);
  const magnitude = 10 ** Math.floor(Math.log10(rawStep));
  const step = [1, 2, 5, 10].map((m) => m * magnitude).find((s) => s >= rawStep) ?? rawStep;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    ticks.push(Number(t.toFixed(10)));
  }
  return ticks;
}
