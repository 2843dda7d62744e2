/** Request discipline: trailing-edge debounce and a one-in-flight gate. */

export class Debouncer {
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(readonly delayMs: number) {}

  /** Replaces any pending call; fn fires once, delayMs after the last edit. */
  schedule(fn: () => void): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      fn();
    }, this.delayMs);
  }

  cancel(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  get pending(): boolean {
    return this.timer !== null;
  }
}

/** At most one task runs at a time; a newer submission replaces the queued
 * one, so a burst of calls settles with the latest task having run last. */
export class SingleFlight {
  private inFlight = false;
  private queued: (() => Promise<void>) | null = null;

  async run(task: () => Promise<void>): Promise<void> {
    if (this.inFlight) {
      this.queued = task;
      return;
    }
    this.inFlight = true;
    try {
      await task();
    } finally {
      this.inFlight = false;
      const next = this.queued;
      this.queued = null;
      if (next !== null) {
        void this.run(next);
      }
    }
  }

  get busy(): boolean {
    return this.inFlight || this.queued !== null;
  }
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
