/** Browser entry: wires the panels to the DOM.
 *
 * Everything testable lives in the modules this file imports; here is only
 * element lookup and event plumbing, so it bails out quietly when there is
 * no DOM (the test runner imports modules directly, never this file).
 */

import { ApiClient, DesignDocument } from "./api.js";
import { DesignSession } from "./session.js";
import { MaterialPanel, PLA, scaleYoungs } from "./material.js";
import { OptimizePanel } from "./optimize.js";
import { spectrumPlot, axisTicks } from "./plot.js";
import { parseWav } from "./wav.js";

const PLOT_W = 720;
const PLOT_H = 320;
const GRID = { f_min: 200.0, f_max: 1500.0, count: 521 };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

function renderPlot(session: DesignSession): void {
  const svg = el<HTMLElement>("plot");
  if (session.spectrum === null) {
    svg.innerHTML = "";
    return;
  }
  const model = spectrumPlot(session.spectrum, { width: PLOT_W, height: PLOT_H });
  const ticks = axisTicks(model.fMin, model.fMax, 8)
    .map((f) => {
      const x = ((f - model.fMin) / (model.fMax - model.fMin)) * PLOT_W;
      return `<line x1="${x}" y1="0" x2="${x}" y2="${PLOT_H}" class="tick"/>`;
    })
    .join("");
  svg.innerHTML =
    `${ticks}<path d="${model.path}" fill="none" stroke="currentColor"/>`;
  el("plot-revision").textContent = session.spectrum.revision;
}

function renderViolations(session: DesignSession): void {
  const box = el("violations");
  if (session.inlineError !== null) {
    box.textContent = session.inlineError;
    return;
  }
  box.textContent = session.violations
    .map((v) => `${v.code}: ${v.message}`)
    .join("\n");
}

function wireChainEditor(session: DesignSession): void {
  el("add-chamber").addEventListener("click", () => {
    session.edit((doc: DesignDocument) => {
      doc.chain.push({ type: "chamber", length_m: 0.1, radius_m: 0.04 });
    });
    renderViolations(session);
  });
  el("drop-last").addEventListener("click", () => {
    session.edit((doc: DesignDocument) => {
      doc.chain.pop();
    });
    renderViolations(session);
  });
  el("undo").addEventListener("click", () => {
    session.undo();
    renderPlot(session);
    renderViolations(session);
  });
}

function wireMaterialPanel(api: ApiClient, modelId: string): void {
  const panel = new MaterialPanel(api, modelId);
  const slider = el<HTMLInputElement>("stiffness");
  slider.addEventListener("input", () => {
    panel.scrub(scaleYoungs(PLA, Number(slider.value)));
  });
  const show = () => {
    el("dominant").textContent =
      panel.dominantHz === null ? "-" : `${panel.dominantHz.toFixed(1)} Hz`;
    el("decay").textContent = panel.decayReadout;
    if (panel.wav !== null) {
      el("duration").textContent = `${parseWav(panel.wav).durationS.toFixed(2)} s`;
    }
  };
  setInterval(() => {
    if (!panel.busy) show();
  }, 100);
}

async function boot(): Promise<void> {
  const api = new ApiClient(el<HTMLInputElement>("server-url").value);
  const designId = el<HTMLInputElement>("design-id").value;
  const session = await DesignSession.open(api, designId, GRID);
  renderPlot(session);
  wireChainEditor(session);

  const optimizer = new OptimizePanel(api);
  el("optimize").addEventListener("click", () => {
    void optimizer
      .submitPitches(el<HTMLInputElement>("notes").value, {
        design_id: session.revision,
        config: {
          f_min: 450.0,
          f_max: 850.0,
          count: 401,
          seed: 42,
          max_iterations: 3000,
        },
      })
      .then(() => optimizer.whenSettled())
      .then(async () => {
        el("job-state").textContent = optimizer.state;
        el("residuals").textContent = optimizer.residualRows
          .map((r) => `${r.label}: ${r.residualCents.toFixed(1)} ct`)
          .join("\n");
        if (optimizer.state === "done") {
          await optimizer.adopt(session);
          renderPlot(session);
        }
      });
  });

  const modelId = el<HTMLInputElement>("model-id").value;
  if (modelId !== "") {
    wireMaterialPanel(api, modelId);
  }

  // repaint after debounced commits settle
  setInterval(() => {
    if (session.idle && session.spectrum?.revision !== el("plot-revision").textContent) {
      renderPlot(session);
      renderViolations(session);
    }
  }, 100);
}

if (typeof document !== "undefined" && document.getElementById("plot") !== null) {
  void boot();
}
