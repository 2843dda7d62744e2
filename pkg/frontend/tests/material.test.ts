import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import {
  decaySeconds,
  formatDecay,
  MaterialPanel,
  PLA,
  scaleYoungs,
  toDocument,
} from "../src/material.js";
import { FakeService } from "./fake_service.js";

describe("decay readout", () => {
  it("is infinite for an undamped material", () => {
    const undamped = { ...PLA, alpha: 0, beta: 0 };
    expect(decaySeconds(undamped, 2 * Math.PI * 440)).toBe(Infinity);
    expect(formatDecay(decaySeconds(undamped, 100))).toBe("∞");
  });

  it("follows the damping model for PLA", () => {
    const omega = 2 * Math.PI * 440;
    const rate = (PLA.alpha + PLA.beta * omega * omega) / 2;
    expect(decaySeconds(PLA, omega)).toBeCloseTo(Math.log(1000) / rate, 12);
    expect(formatDecay(1.2345)).toBe("1.23 s");
  });
});

describe("material documents", () => {
  it("serializes every field the server reads", () => {
    expect(toDocument(PLA)).toEqual({
      name: "pla",
      youngs_modulus_pa: 3.5e9,
      density_kgpm3: 1240.0,
      rayleigh_alpha: 6.0,
      rayleigh_beta: 2e-7,
    });
  });

  it("scaleYoungs changes stiffness only", () => {
    const stiff = scaleYoungs(PLA, 4);
    expect(stiff.youngsModulusPa).toBeCloseTo(1.4e10, 3);
    expect(stiff.densityKgpm3).toBe(PLA.densityKgpm3);
    expect(stiff.alpha).toBe(PLA.alpha);
  });
});

describe("MaterialPanel", () => {
  function panelWith(fake: FakeService): MaterialPanel {
    const api = new ApiClient("http://fake", fake.fetch);
    return new MaterialPanel(api, "model-1");
  }

  it("a drag burst settles on the last position with coalesced requests", async () => {
    const fake = new FakeService();
    fake.delayMs = 15;
    const panel = panelWith(fake);

    for (const scale of [1.25, 1.5, 2, 2.5, 3, 3.5, 4]) {
      panel.scrub(scaleYoungs(PLA, scale));
    }
    await panel.whenSettled();

    expect(panel.dominantHz).toBeCloseTo(200.0, 9); // E x4 doubles the pitch
    expect(fake.retuneCalls).toBe(2); // first drag plus the queued latest
    expect(fake.maxConcurrent).toBe(1);
    expect(panel.wav).not.toBeNull();
  });

  it("the synthesized clip matches the final material", async () => {
    const fake = new FakeService();
    fake.delayMs = 5;
    const panel = panelWith(fake);
    panel.scrub(scaleYoungs(PLA, 2));
    panel.scrub(scaleYoungs(PLA, 4));
    await panel.whenSettled();

    const sent = new Float64Array(panel.wav!);
    expect(sent[0]).toBeCloseTo(4 * 3.5e9, 3);
  });

  it("shows the infinity readout for an undamped scrub", async () => {
    const fake = new FakeService();
    const panel = panelWith(fake);
    panel.scrub({ ...PLA, alpha: 0, beta: 0 });
    await panel.whenSettled();
    expect(panel.decayReadout).toBe("∞");
    expect(panel.notice).toBeNull();
  });

  it("keeps serving after a server error", async () => {
    const fake = new FakeService();
    fake.retuneStatus = 400;
    const panel = panelWith(fake);
    panel.scrub(scaleYoungs(PLA, 2));
    await panel.whenSettled();
    expect(panel.notice).toContain("material");
    expect(panel.dominantHz).toBeNull();

    fake.retuneStatus = 200;
    panel.scrub(scaleYoungs(PLA, 4));
    await panel.whenSettled();
    expect(panel.notice).toBeNull();
    expect(panel.dominantHz).toBeCloseTo(200.0, 9);
  });
});
