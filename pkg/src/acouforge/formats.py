"""Byte-stable CSV and WAV writers shared by the CLI and the HTTP service.

The same spectrum or waveform rendered through either interface must compare
equal with cmp/diff, so the formatting rules here (header, shortest-exact
decimal floats, LF endings, PCM16 rounding) are part of the public contract.
"""

import io
import wave

import numpy as np

from .core import Spectrum
from .errors import InvalidArgument, ParseError

CSV_HEADER = "frequency_hz,value"
PCM16_FULL_SCALE = 32767
DEFAULT_SAMPLE_RATE_HZ = 44100.0


def spectrum_to_csv(spectrum: Spectrum) -> str:
    """One row per grid point; repr floats round-trip exactly."""
    rows = [CSV_HEADER]
    for f, v in zip(spectrum.frequencies, spectrum.values):
        rows.append(f"{float(f)!r},{float(v)!r}")
    return "\n".join(rows) + "\n"


def parse_spectrum_csv(text: str, kind: str = "transmission_loss_dB") -> Spectrum:
    lines = text.splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ParseError(f"expected header {CSV_HEADER!r}", line=1, column=1)
    frequencies = []
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError("expected two comma-separated fields",
                             line=lineno, column=1)
        try:
            frequencies.append(float(parts[0]))
            values.append(float(parts[1]))
        except ValueError:
            raise ParseError("fields must be numbers",
                             line=lineno, column=1) from None
    if not frequencies:
        raise ParseError("no data rows", line=len(lines), column=1)
    return Spectrum(np.asarray(frequencies), np.asarray(values), kind)


def wav_bytes(samples, sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ) -> bytes:
    """RIFF PCM16 mono. Samples are clipped to [-1, 1] before quantization."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1:
        raise InvalidArgument("samples must be a 1-D array")
    if not np.isfinite(samples).all():
        raise InvalidArgument("samples must be finite")
    if sample_rate_hz <= 0:
        raise InvalidArgument("sample rate must be positive")
    pcm = np.round(np.clip(samples, -1.0, 1.0) * PCM16_FULL_SCALE)
    buffer = io.BytesIO()
    with wave.open(buffer, "wb") as writer:
        writer.setnchannels(1)
        writer.setsampwidth(2)
        writer.setframerate(int(round(sample_rate_hz)))
        writer.writeframes(pcm.astype("<i2").tobytes())
    return buffer.getvalue()


def parse_wav(data: bytes):
    """Decode PCM16 mono WAV; returns (samples in [-1, 1], sample rate)."""
    try:
        with wave.open(io.BytesIO(data), "rb") as reader:
            channels = reader.getnchannels()
            width = reader.getsampwidth()
            rate = reader.getframerate()
            raw = reader.readframes(reader.getnframes())
    except (wave.Error, EOFError) as exc:
        raise ParseError(f"not a WAV stream: {exc}") from None
    if channels != 1 or width != 2:
        raise ParseError(f"expected PCM16 mono, got {channels} channel(s) "
                         f"of width {width}")
    samples = np.frombuffer(raw, dtype="<i2").astype(float) / PCM16_FULL_SCALE
    return samples, float(rate)
