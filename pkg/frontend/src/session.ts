/** Editing session for one design: local draft, server revisions, tagged plot.
 *
 * Invariants kept here:
 *  - the displayed spectrum always carries the revision id that produced it;
 *  - edits are committed after a 150 ms debounce with at most one request
 *    chain in flight (latest edit wins);
 *  - undo restores the previous revision's plot from cache, no request.
 */

import {
  ApiClient,
  ApiError,
  DesignDocument,
  GridRequest,
  Violation,
} from "./api.js";
import { parseSpectrumCsv, Spectrum } from "./csv.js";
import { Debouncer, SingleFlight, sleep } from "./gate.js";

export const EDIT_DEBOUNCE_MS = 150;

export interface TaggedSpectrum extends Spectrum {
  revision: string;
}

interface Snapshot {
  revision: string;
  document: DesignDocument;
  spectrum: TaggedSpectrum | null;
}

export class DesignSession {
  revision: string;
  document: DesignDocument;
  spectrum: TaggedSpectrum | null = null;
  /** Violations from the server for the current draft, rendered inline. */
  violations: Violation[] = [];
  /** Local precondition failures (e.g. EMPTY_CHAIN); never sent anywhere. */
  inlineError: string | null = null;
  /** Spectrum requests actually issued; bursts of edits should not inflate it. */
  spectrumRequests = 0;

  private readonly history: Snapshot[] = [];
  private readonly debouncer: Debouncer;
  private readonly flight = new SingleFlight();

  constructor(
    private readonly api: ApiClient,
    designId: string,
    document: DesignDocument,
    readonly grid: GridRequest,
    debounceMs: number = EDIT_DEBOUNCE_MS,
  ) {
    this.revision = designId;
    this.document = document;
    this.debouncer = new Debouncer(debounceMs);
  }

  static async open(
    api: ApiClient,
    designId: string,
    grid: GridRequest,
    debounceMs: number = EDIT_DEBOUNCE_MS,
  ): Promise<DesignSession> {
    const document = await api.getDesign(designId);
    const session = new DesignSession(api, designId, document, grid, debounceMs);
    await session.refreshSpectrum();
    return session;
  }

  /** Applies a structural edit to the draft and schedules the commit. */
  edit(mutate: (doc: DesignDocument) => void): void {
    const draft = structuredClone(this.document);
    mutate(draft);
    if (draft.chain.length === 0) {
      this.inlineError = "EMPTY_CHAIN";
      return;
    }
    this.inlineError = null;
    this.history.push(this.snapshot());
    this.document = draft;
    this.debouncer.schedule(() => {
      void this.flight.run(() => this.commit());
    });
  }

  /** True whenever no edit is waiting and no request chain is running. */
  get idle(): boolean {
    return !this.debouncer.pending && !this.flight.busy;
  }

  async whenIdle(): Promise<void> {
    while (!this.idle) {
      await sleep(5);
    }
  }

  undo(): boolean {
    const previous = this.history.pop();
    if (previous === undefined) {
      return false;
    }
    this.debouncer.cancel();
    this.revision = previous.revision;
    this.document = previous.document;
    this.spectrum = previous.spectrum;
    this.violations = [];
    this.inlineError = null;
    return true;
  }

  /** Swaps to another stored design; plot and document change together. */
  async adopt(designId: string): Promise<void> {
    const document = await this.api.getDesign(designId);
    const text = await this.api.spectrumCsv(designId, this.grid);
    const parsed = parseSpectrumCsv(text);
    this.history.push(this.snapshot());
    this.revision = designId;
    this.document = document;
    this.spectrum = { ...parsed, revision: designId };
    this.violations = [];
    this.inlineError = null;
  }

  private snapshot(): Snapshot {
    return {
      revision: this.revision,
      document: structuredClone(this.document),
      spectrum: this.spectrum,
    };
  }

  private async commit(): Promise<void> {
    const draft = this.document;
    let committed: string;
    try {
      committed = (await this.api.putDesign(this.revision, draft)).id;
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        this.violations = error.violations;
        return;
      }
      throw error;
    }
    this.violations = [];
    this.revision = committed;
    await this.refreshSpectrum();
  }

  async refreshSpectrum(): Promise<void> {
    const revision = this.revision;
    this.spectrumRequests += 1;
    const text = await this.api.spectrumCsv(revision, this.grid);
    if (revision !== this.revision) {
      return; // a newer revision owns the plot now
    }
    this.spectrum = { ...parseSpectrumCsv(text), revision };
  }
}
