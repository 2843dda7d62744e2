/** Optimizer panel: submit a target, poll the job, adopt the winner.
 *
 * Polling runs on a plain timer at 500 ms. Cancel clears the timer and the
 * panel forgets the job; the server may keep computing but nothing here will
 * ever show its result. Adoption is delegated to the session so the document
 * and plot swap in the same tick.
 */

import {
  ApiClient,
  JobSnapshot,
  OptimizeRequest,
  OptimizeResult,
  OptimizeTarget,
} from "./api.js";
import { noteNames, noteToMidi } from "./pitch.js";
import { sleep } from "./gate.js";
import { DesignSession } from "./session.js";

export const JOB_POLL_MS = 500;

export interface ResidualRow {
  label: string;
  residualCents: number;
}

export class OptimizePanel {
  jobId: string | null = null;
  state: "idle" | "queued" | "running" | "done" | "failed" = "idle";
  progress = 0;
  error: string | null = null;
  result: OptimizeResult | null = null;
  /** Per-target residuals shown when a search finishes, met or not. */
  residualRows: ResidualRow[] = [];
  private labels: string[] = [];
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly pollMs: number = JOB_POLL_MS,
  ) {}

  /** Parses note names locally; only MIDI numbers go over the wire. */
  async submitPitches(notes: string, request: Omit<OptimizeRequest, "target">): Promise<void> {
    const names = noteNames(notes);
    const target: OptimizeTarget = {
      kind: "pitches",
      midi: names.map(noteToMidi),
    };
    await this.submit({ ...request, target }, names);
  }

  async submit(request: OptimizeRequest, labels: string[] = []): Promise<void> {
    this.cancel();
    this.state = "queued";
    this.progress = 0;
    this.error = null;
    this.result = null;
    this.residualRows = [];
    this.labels = labels;
    this.jobId = await this.api.submitOptimize(request);
    this.schedulePoll();
  }

  cancel(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.jobId = null;
    if (this.state === "queued" || this.state === "running") {
      this.state = "idle";
    }
  }

  get polling(): boolean {
    return this.timer !== null;
  }

  async whenSettled(): Promise<void> {
    while (this.state === "queued" || this.state === "running") {
      await sleep(this.pollMs / 4);
    }
  }

  async adopt(session: DesignSession): Promise<void> {
    if (this.result === null) {
      throw new Error("no finished design to adopt");
    }
    await session.adopt(this.result.design_id);
  }

  private schedulePoll(): void {
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.poll();
    }, this.pollMs);
  }

  private async poll(): Promise<void> {
    const jobId = this.jobId;
    if (jobId === null) {
      return; // cancelled while the timer was pending
    }
    let snapshot: JobSnapshot;
    try {
      snapshot = await this.api.job(jobId);
    } catch (error) {
      this.state = "failed";
      this.error = error instanceof Error ? error.message : String(error);
      return;
    }
    if (jobId !== this.jobId) {
      return; // cancelled or resubmitted during the request
    }
    this.progress = snapshot.progress;
    if (snapshot.state === "queued" || snapshot.state === "running") {
      this.state = snapshot.state;
      this.schedulePoll();
      return;
    }
    if (snapshot.state === "failed") {
      this.state = "failed";
      this.error = snapshot.error ?? "search failed";
      return;
    }
    const result = await this.api.jobResult(jobId);
    if (jobId !== this.jobId) {
      return;
    }
    this.result = result;
    this.residualRows = result.residuals.map((residualCents, i) => ({
      label: this.labels[i] ?? `target ${i + 1}`,
      residualCents,
    }));
    this.state = "done"; // set last so settled implies the rows exist
  }
}
