/** Minimal RIFF/WAVE reader for the 16-bit mono PCM files the server emits. */

export interface WavData {
  sampleRate: number;
  samples: Float32Array;
  durationS: number;
}

function tag(view: DataView, offset: number): string {
  let out = "";
  for (let i = 0; i < 4; i++) {
    out += String.fromCharCode(view.getUint8(offset + i));
  }
  return out;
}

export function parseWav(buffer: ArrayBuffer): WavData {
  const view = new DataView(buffer);
  if (buffer.byteLength < 44 || tag(view, 0) !== "RIFF" || tag(view, 8) !== "WAVE") {
    throw new Error("not a RIFF/WAVE file");
  }
  let sampleRate = 0;
  let bitsPerSample = 0;
  let channels = 0;
  let dataOffset = -1;
  let dataLength = 0;
  let offset = 12;
  while (offset + 8 <= buffer.byteLength) {
    const chunkId = tag(view, offset);
    const chunkSize = view.getUint32(offset + 4, true);
    if (chunkId === "fmt ") {
      const format = view.getUint16(offset + 8, true);
      if (format !== 1) {
        throw new Error(`unsupported WAVE format code ${format}`);
      }
      channels = view.getUint16(offset + 10, true);
      sampleRate = view.getUint32(offset + 12, true);
      bitsPerSample = view.getUint16(offset + 22, true);
    } else if (chunkId === "data") {
      dataOffset = offset + 8;
      dataLength = chunkSize;
    }
    offset += 8 + chunkSize + (chunkSize % 2); // chunks are word-aligned
  }
  if (sampleRate === 0 || dataOffset < 0) {
    throw new Error("missing fmt or data chunk");
  }
  if (channels !== 1 || bitsPerSample !== 16) {
    throw new Error(`expected 16-bit mono PCM, got ${bitsPerSample}-bit x${channels}`);
  }
  const count = Math.floor(dataLength / 2);
  const samples = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    samples[i] = view.getInt16(dataOffset + 2 * i, true) / 32768;
  }
  return { sampleRate, samples, durationS: count / sampleRate };
}

/** Largest absolute sample; 0 means digital silence. */
export function peakAmplitude(wav: WavData): number {
  let peak = 0;
  for (const s of wav.samples) {
    peak = Math.max(peak, Math.abs(s));
  }
  return peak;
}
