/** Editable gain and pitch envelopes for the synthesis request. */

export interface ControlPoint {
  t: number;
  v: number;
}

const IDENTITY: ControlPoint[] = [{ t: 0, v: 1 }];

function insertSorted(points: ControlPoint[], point: ControlPoint): ControlPoint[] {
  const next = points.filter((p) => p.t !== point.t);
  next.push(point);
  next.sort((a, b) => a.t - b.t);
  return next;
}

export class EnvelopeEditor {
  gain: ControlPoint[] = [...IDENTITY];
  pitchRatio: ControlPoint[] = [...IDENTITY];

  setGain(t: number, v: number): void {
    if (t < 0 || !Number.isFinite(t) || !Number.isFinite(v)) {
      throw new RangeError(`bad gain point (${t}, ${v})`);
    }
    this.gain = insertSorted(this.gain, { t, v: Math.max(0, v) });
  }

  setPitchRatio(t: number, v: number): void {
    if (t < 0 || !Number.isFinite(t) || !Number.isFinite(v) || v <= 0) {
      throw new RangeError(`bad pitch point (${t}, ${v})`);
    }
    this.pitchRatio = insertSorted(this.pitchRatio, { t, v });
  }

  removeGain(t: number): void {
    const next = this.gain.filter((p) => p.t !== t);
    this.gain = next.length > 0 ? next : [...IDENTITY];
  }

  reset(): void {
    this.gain = [...IDENTITY];
    this.pitchRatio = [...IDENTITY];
  }

  private static isIdentity(points: ControlPoint[]): boolean {
    return points.length === 1 && points[0].t === 0 && points[0].v === 1;
  }

  /** Wire shape for the synthesize call; identity tracks are omitted. */
  toDocument(): { gain?: number[][]; pitch_ratio?: number[][] } | undefined {
    const doc: { gain?: number[][]; pitch_ratio?: number[][] } = {};
    if (!EnvelopeEditor.isIdentity(this.gain)) {
      doc.gain = this.gain.map((p) => [p.t, p.v]);
    }
    if (!EnvelopeEditor.isIdentity(this.pitchRatio)) {
      doc.pitch_ratio = this.pitchRatio.map((p) => [p.t, p.v]);
    }
    return doc.gain === undefined && doc.pitch_ratio === undefined ? undefined : doc;
  }
}
