/** Typed client for the acouforge HTTP service.
 *
 * The UI computes no physics: every number it shows comes back from one of
 * these calls. Errors share the service envelope {code, message, violations}.
 */

export interface MediumDocument {
  sound_speed_mps: number;
  density_kgpm3: number;
}

export interface ChainElement {
  type: "tube" | "chamber";
  length_m: number;
  radius_m: number;
}

export interface QuarterWaveElement {
  type: "quarter_wave";
  length_m: number;
  radius_m: number;
  attach_after: number;
}

export interface HelmholtzElement {
  type: "helmholtz";
  neck_length_m: number;
  neck_radius_m: number;
  cavity_volume_m3: number;
  attach_after: number;
}

export type BranchElement = QuarterWaveElement | HelmholtzElement;

export interface DesignDocument {
  format_version: number;
  name: string;
  medium?: MediumDocument;
  port_radius_m: number;
  chain: ChainElement[];
  branches: BranchElement[];
  metadata?: Record<string, unknown>;
}

export interface Violation {
  code: string;
  message: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly violations: Violation[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface GridRequest {
  f_min: number;
  f_max: number;
  count: number;
  spacing?: "linear" | "logarithmic";
}

export interface MaterialDocument {
  name?: string;
  youngs_modulus_pa?: number;
  density_kgpm3?: number;
  rayleigh_alpha?: number;
  rayleigh_beta?: number;
}

export interface OptimizeTarget {
  kind: "pitches" | "notches" | "curve";
  midi?: number[];
  tolerance_cents?: number;
  frequencies_hz?: number[];
  min_depth_db?: number;
}

export interface OptimizeRequest {
  design_id: string;
  target: OptimizeTarget;
  config: GridRequest & Record<string, unknown>;
}

export interface OptimizeResult {
  design_id: string;
  objective: number;
  residuals: number[];
  evaluations: number;
  wall_time_s: number;
  success: boolean;
}

export interface JobSnapshot {
  id: string;
  kind: string;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  result?: OptimizeResult;
  error?: string;
}

export interface ModelSummary {
  id: string;
  mode_count: number;
  node_count: number;
  frequencies_hz: number[];
}

export interface RetuneResponse {
  frequencies_hz: number[];
  dominant_frequency_hz: number;
}

export interface SynthesizeRequest {
  material: MaterialDocument;
  node?: number;
  impulse?: number;
  listener_distance?: number;
  duration_s?: number;
  sample_rate_hz?: number;
  envelope?: { gain?: number[][]; pitch_ratio?: number[][] };
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let code = `HTTP_${response.status}`;
      let message = response.statusText;
      let violations: Violation[] = [];
      try {
        const body = await response.json();
        code = body.code ?? code;
        message = body.message ?? message;
        violations = body.violations ?? [];
      } catch {
        // non-JSON error body; keep the status-line fallback
      }
      throw new ApiError(response.status, code, message, violations);
    }
    return response;
  }

  private post(path: string, body: unknown): Promise<Response> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async health(): Promise<boolean> {
    const body = await (await this.request("/health")).json();
    return body.status === "ok";
  }

  async createDesign(doc: DesignDocument): Promise<string> {
    return (await (await this.post("/designs", doc)).json()).id;
  }

  async getDesign(id: string): Promise<DesignDocument> {
    return (await this.request(`/designs/${id}`)).json();
  }

  /** Stores a revision; the returned id names the new content. */
  async putDesign(
    id: string,
    doc: DesignDocument,
  ): Promise<{ id: string; previous_id: string }> {
    const response = await this.request(`/designs/${id}`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
    return response.json();
  }

  async spectrumCsv(id: string, grid: GridRequest): Promise<string> {
    return (await this.post(`/designs/${id}/spectrum`, grid)).text();
  }

  async stl(id: string, params: { cell_size_m?: number; wall_m?: number }): Promise<ArrayBuffer> {
    return (await this.post(`/designs/${id}/stl`, params)).arrayBuffer();
  }

  async submitOptimize(body: OptimizeRequest): Promise<string> {
    return (await (await this.post("/jobs/optimize", body)).json()).id;
  }

  async job(id: string): Promise<JobSnapshot> {
    return (await this.request(`/jobs/${id}`)).json();
  }

  async jobResult(id: string): Promise<OptimizeResult> {
    return (await this.request(`/jobs/${id}/result`)).json();
  }

  async createModel(body: {
    grid: unknown;
    material: MaterialDocument;
    max_modes?: number;
  }): Promise<ModelSummary> {
    return (await this.post("/modal/models", body)).json();
  }

  async retune(modelId: string, material: MaterialDocument): Promise<RetuneResponse> {
    return (await this.post(`/modal/models/${modelId}/retune`, { material })).json();
  }

  async synthesize(modelId: string, body: SynthesizeRequest): Promise<ArrayBuffer> {
    return (await this.post(`/modal/models/${modelId}/synthesize`, body)).arrayBuffer();
  }
}
