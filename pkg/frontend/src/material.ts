/** Material scrubbing for the modal panel.
 *
 * Dragging a stiffness slider can emit dozens of values per second; the
 * server is asked about at most one of them at a time and the newest drag
 * position always wins. The decay readout is derived from the damping the
 * user typed, not from audio analysis: for Rayleigh damping the modal decay
 * rate is (alpha + beta * omega^2) / 2, so alpha = beta = 0 means the tone
 * rings forever and the readout shows the infinity glyph.
 */

import {
  ApiClient,
  MaterialDocument,
  RetuneResponse,
  SynthesizeRequest,
} from "./api.js";
import { SingleFlight, sleep } from "./gate.js";

export interface MaterialState {
  name: string;
  youngsModulusPa: number;
  densityKgpm3: number;
  alpha: number;
  beta: number;
}

export const PLA: MaterialState = {
  name: "pla",
  youngsModulusPa: 3.5e9,
  densityKgpm3: 1240.0,
  alpha: 6.0,
  beta: 2e-7,
};

export function toDocument(material: MaterialState): MaterialDocument {
  return {
    name: material.name,
    youngs_modulus_pa: material.youngsModulusPa,
    density_kgpm3: material.densityKgpm3,
    rayleigh_alpha: material.alpha,
    rayleigh_beta: material.beta,
  };
}

export function scaleYoungs(base: MaterialState, factor: number): MaterialState {
  return {
    ...base,
    name: `${base.name}-x${factor}`,
    youngsModulusPa: base.youngsModulusPa * factor,
  };
}

/** Seconds for a mode to fall 60 dB, or Infinity when undamped. */
export function decaySeconds(material: MaterialState, omega: number): number {
  const rate = (material.alpha + material.beta * omega * omega) / 2;
  if (rate <= 0) {
    return Infinity;
  }
  return Math.log(1000) / rate;
}

export function formatDecay(seconds: number): string {
  if (!Number.isFinite(seconds)) {
    return "∞";
  }
  return `${seconds.toFixed(2)} s`;
}

export class MaterialPanel {
  material: MaterialState;
  /** Dominant frequency reported by the last completed retune. */
  dominantHz: number | null = null;
  decayReadout = "";
  wav: ArrayBuffer | null = null;
  notice: string | null = null;
  retuneRequests = 0;

  private readonly flight = new SingleFlight();

  constructor(
    private readonly api: ApiClient,
    private readonly modelId: string,
    base: MaterialState = PLA,
  ) {
    this.material = base;
  }

  /** Called on every slider movement; coalesces while a request runs. */
  scrub(material: MaterialState): void {
    this.material = material;
    void this.flight.run(() => this.refresh());
  }

  get busy(): boolean {
    return this.flight.busy;
  }

  async whenSettled(): Promise<void> {
    while (this.flight.busy) {
      await sleep(5);
    }
  }

  private async refresh(): Promise<void> {
    const material = this.material; // latest drag position at run time
    this.retuneRequests += 1;
    const doc = toDocument(material);
    try {
      const retuned: RetuneResponse = await this.api.retune(this.modelId, doc);
      const request: SynthesizeRequest = { material: doc };
      const wav = await this.api.synthesize(this.modelId, request);
      if (material !== this.material) {
        return; // a newer scrub owns the panel
      }
      this.dominantHz = retuned.dominant_frequency_hz;
      this.decayReadout = formatDecay(
        decaySeconds(material, 2 * Math.PI * retuned.dominant_frequency_hz),
      );
      this.wav = wav;
      this.notice = null;
    } catch (error) {
      this.notice = error instanceof Error ? error.message : String(error);
    }
  }
}
