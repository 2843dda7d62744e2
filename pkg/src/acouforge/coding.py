"""Bit payloads carried as transmission-loss notches.

Each set bit j of a payload becomes a quarter-wave side branch tuned to
f_j = base + j*step along a straight main tube; a cleared bit leaves its
band empty.  A tap is simulated by filtering a Hann-windowed white burst
with the design's transmission loss; the receiving side re-estimates the
loss from response and reference waveforms and reads a bit wherever the
best notch depth inside the band window clears the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    FrequencyGrid,
    Medium,
    Spectrum,
    as_frequencies,
    first_cutoff_frequency,
)
from .design import FilterDesign, QuarterWaveBranch, Tube, design_transmission_loss
from .errors import (
    AliasingError,
    BandOutOfRange,
    InvalidArgument,
    InvalidBandPlan,
    ReferenceTooQuiet,
)
from .rng import SplitMix64

MAX_BITS = 16


def _check_bit_count(n_bits: int) -> int:
    n = int(n_bits)
    if n != n_bits or not 1 <= n <= MAX_BITS:
        raise InvalidArgument(f"bit count must be an integer in 1..{MAX_BITS}")
    return n


@dataclass(frozen=True)
class BandPlan:
    """Arithmetic ladder of bit-carrier frequencies, f_j = base + j*step."""

    base_hz: float = 800.0
    step_hz: float = 400.0

    def __post_init__(self):
        if self.base_hz <= 0 or self.step_hz <= 0:
            raise InvalidArgument("band plan needs a positive base and step")

    def frequency(self, bit: int) -> float:
        return self.base_hz + bit * self.step_hz

    def analysis_grid(self, n_bits: int,
                      resolution_hz: float = 5.0) -> FrequencyGrid:
        """Linear grid covering every bit window f_j +- step/4."""
        n = _check_bit_count(n_bits)
        if resolution_hz <= 0:
            raise InvalidArgument("grid resolution must be positive")
        lo = self.base_hz - self.step_hz / 4.0
        hi = self.frequency(n - 1) + self.step_hz / 4.0
        if lo <= 0:
            raise InvalidBandPlan("the lowest bit window reaches 0 Hz")
        count = max(2, int(round((hi - lo) / resolution_hz)) + 1)
        return FrequencyGrid(lo, hi, count)


@dataclass(frozen=True)
class TagPayload:
    """Ordered bits plus the band plan and detection threshold they assume."""

    bits: tuple
    band_plan: BandPlan = BandPlan()
    threshold_db: float = 10.0

    def __post_init__(self):
        bits = tuple(bool(b) for b in self.bits)
        object.__setattr__(self, "bits", bits)
        _check_bit_count(len(bits))
        # a zero threshold would read numerical ripple as data; see decode
        if self.threshold_db <= 0:
            raise InvalidArgument("detection threshold must be positive")

    @classmethod
    def from_string(cls, text: str, band_plan: BandPlan = BandPlan(),
                    threshold_db: float = 10.0) -> "TagPayload":
        if not text or any(ch not in "01" for ch in text):
            raise InvalidArgument("payload string must be nonempty 0s and 1s")
        return cls(tuple(ch == "1" for ch in text), band_plan, threshold_db)

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)


@dataclass(frozen=True)
class EncodeConfig:
    """Physical parameters of the carrier tube and its bit branches."""

    branch_radius: float = 0.008
    port_radius: float = 0.02
    segment_length: float = 0.05
    medium: Medium = Medium()
    name: str = "tag"

    def __post_init__(self):
        if min(self.branch_radius, self.port_radius, self.segment_length) <= 0:
            raise InvalidArgument("encode dimensions must be positive")


def _notch_half_width(frequency: float, area_ratio: float) -> float:
    """-3 dB half-width of a quarter-wave notch, (S_b/S_0)*f/pi."""
    return area_ratio * frequency / math.pi


def encode(payload: TagPayload, config: EncodeConfig = EncodeConfig()) -> FilterDesign:
    """Build the notch-bearing design for a payload.

    Bit j maps to a quarter-wave branch of length c/(4*f_j) attached after
    main-tube segment j+1; cleared bits contribute nothing.  Raises
    InvalidBandPlan when a band reaches the plane-wave cutoff of the port
    or adjacent notch -3 dB widths would overlap.
    """
    plan = payload.band_plan
    n = len(payload.bits)
    freqs = [plan.frequency(j) for j in range(n)]
    cutoff = first_cutoff_frequency(config.port_radius, config.medium)
    if freqs[-1] >= cutoff:
        raise InvalidBandPlan(
            f"top band {freqs[-1]:.0f} Hz reaches the plane-wave cutoff "
            f"{cutoff:.0f} Hz of a {config.port_radius} m port")
    area_ratio = (config.branch_radius / config.port_radius) ** 2
    for j, (fa, fb) in enumerate(zip(freqs, freqs[1:])):
        gap = fb - _notch_half_width(fb, area_ratio) \
            - (fa + _notch_half_width(fa, area_ratio))
        if gap <= 0:
            raise InvalidBandPlan(
                f"-3 dB widths of bands {j} and {j + 1} overlap; widen the step")
    # a quarter-wave branch notches at every odd harmonic of its band, at
    # full depth; a plan whose harmonics reach into another bit's decode
    # window cannot distinguish that bit from the harmonic, so reject it
    zone = 1.0 / math.sqrt(10.0 ** (payload.threshold_db / 10.0) - 1.0)
    half_window = plan.step_hz / 4.0
    top_edge = freqs[-1] + half_window
    for j in range(n):
        for m in range(3, MAX_BITS * 8, 2):
            fm = m * freqs[j]
            reach = _notch_half_width(fm, area_ratio) * zone
            if fm > top_edge + reach:
                break
            for k in range(n):
                if abs(fm - freqs[k]) <= half_window + reach:
                    raise InvalidBandPlan(
                        f"harmonic {m}x of band {j} ({fm:.0f} Hz) lands in "
                        f"band {k}'s decode window; change base or step")
    c = config.medium.sound_speed
    chain = tuple(Tube(config.segment_length, config.port_radius)
                  for _ in range(n + 1))
    branches = tuple(
        QuarterWaveBranch(c / (4.0 * freqs[j]), config.branch_radius,
                          attach_after=j + 1)
        for j in range(n) if payload.bits[j])
    return FilterDesign(
        config.name, config.port_radius, chain=chain, branches=branches,
        medium=config.medium,
        metadata={
            "band_plan_base_hz": plan.base_hz,
            "band_plan_step_hz": plan.step_hz,
            "bit_count": n,
            "threshold_db": payload.threshold_db,
        })


def decode(spectrum: Spectrum, band_plan: BandPlan, n_bits: int,
           threshold_db: float = 10.0) -> tuple:
    """Read bits from a transmission-loss spectrum.

    Bit j is set when the maximum loss within f_j +- step/4 reaches the
    threshold.  A threshold of 0 dB accepts numerical ripple and decodes
    all ones; thresholds must sit above the ripple floor to be selective.
    """
    if spectrum.kind != "transmission_loss_dB":
        raise InvalidArgument(
            f"decode needs a transmission_loss_dB spectrum, got {spectrum.kind!r}")
    if threshold_db < 0:
        raise InvalidArgument("threshold must be nonnegative")
    n = _check_bit_count(n_bits)
    f = spectrum.frequencies
    v = spectrum.values
    half = band_plan.step_hz / 4.0
    slack = 1e-9 * band_plan.step_hz
    bits = []
    for j in range(n):
        fj = band_plan.frequency(j)
        if fj - half < f[0] - slack or fj + half > f[-1] + slack:
            raise BandOutOfRange(
                f"bit {j} window {fj - half:.1f}..{fj + half:.1f} Hz leaves "
                f"the spectrum span {f[0]:.1f}..{f[-1]:.1f} Hz")
        window = (f >= fj - half) & (f <= fj + half)
        bits.append(bool(v[window].max() >= threshold_db))
    return tuple(bits)


# ---------------------------------------------------------------------------
# Probe simulation and spectrum estimation


@dataclass(frozen=True)
class ProbeSignal:
    """A seeded white burst used as the tap excitation."""

    duration_s: float = 0.2
    sample_rate_hz: int = 16000
    seed: int = 0

    def __post_init__(self):
        if self.duration_s <= 0:
            raise InvalidArgument("probe duration must be positive")
        if int(self.sample_rate_hz) != self.sample_rate_hz or self.sample_rate_hz <= 0:
            raise InvalidArgument("sample rate must be a positive integer")
        if self.sample_count < 16:
            raise InvalidArgument("probe is too short to analyze")

    @property
    def sample_count(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))


@dataclass(eq=False)
class Waveform:
    """Uniformly sampled mono signal."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise InvalidArgument("waveform samples must be a nonempty 1-D array")
        if self.sample_rate_hz <= 0:
            raise InvalidArgument("sample rate must be positive")

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


def probe_burst(probe: ProbeSignal) -> Waveform:
    """The reference excitation: Hann-windowed seeded white noise."""
    rng = SplitMix64(probe.seed)
    n = probe.sample_count
    noise = np.fromiter((rng.gauss() for _ in range(n)), dtype=float, count=n)
    return Waveform(np.hanning(n) * noise, probe.sample_rate_hz)


def simulate_response(design: FilterDesign, probe: ProbeSignal,
                      grid) -> Waveform:
    """Filter the probe burst by the design's transmission loss.

    Spectral bins inside the grid span are attenuated by 10^(-TL/20)
    evaluated exactly at the bin frequencies; bins outside the span pass
    unchanged.  Deterministic for a fixed probe seed.
    """
    freqs = as_frequencies(grid)
    if probe.sample_rate_hz < 2.0 * freqs[-1]:
        raise AliasingError(
            f"sample rate {probe.sample_rate_hz} Hz cannot represent "
            f"{freqs[-1]:.0f} Hz")
    ref = probe_burst(probe)
    spec = np.fft.rfft(ref.samples)
    bin_f = np.fft.rfftfreq(ref.samples.size, 1.0 / probe.sample_rate_hz)
    inside = (bin_f >= freqs[0]) & (bin_f <= freqs[-1])
    if inside.any():
        tl = design_transmission_loss(design, bin_f[inside]).values
        spec[inside] *= 10.0 ** (-tl / 20.0)
    return Waveform(np.fft.irfft(spec, ref.samples.size), probe.sample_rate_hz)


def _welch_power(samples: np.ndarray, sample_rate_hz: int):
    """Hann-windowed averaged power spectrum over half-overlapping segments."""
    n = samples.size
    seg = n if n < 512 else n // 2
    hop = max(1, seg // 2)
    window = np.hanning(seg)
    power = np.zeros(seg // 2 + 1)
    starts = range(0, n - seg + 1, hop)
    for s in starts:
        power += np.abs(np.fft.rfft(window * samples[s:s + seg])) ** 2
    power /= len(starts)
    return power, np.fft.rfftfreq(seg, 1.0 / sample_rate_hz)


def estimate_spectrum(waveform: Waveform, reference: Waveform,
                      grid) -> Spectrum:
    """Estimate transmission loss from response and reference waveforms.

    Both signals go through the same Hann-windowed averaged magnitude
    transform; TL = 20*log10(|R|/|Y|) clamped to [0, 120] dB is resampled
    onto the grid by linear interpolation.
    """
    if waveform.sample_rate_hz != reference.sample_rate_hz:
        raise InvalidArgument("waveform and reference sample rates differ")
    if waveform.samples.size != reference.samples.size:
        raise InvalidArgument("waveform and reference lengths differ")
    freqs = as_frequencies(grid)
    if waveform.sample_rate_hz < 2.0 * freqs[-1]:
        raise AliasingError(
            f"sample rate {waveform.sample_rate_hz} Hz cannot represent "
            f"{freqs[-1]:.0f} Hz")
    p_ref, bin_f = _welch_power(reference.samples, reference.sample_rate_hz)
    p_sig, _ = _welch_power(waveform.samples, waveform.sample_rate_hz)
    span = (bin_f >= freqs[0]) & (bin_f <= freqs[-1])
    if not span.any():
        raise InvalidArgument("the grid does not cover any spectral bins")
    peak = float(p_ref.max())
    if peak <= 0.0 or float(p_ref[span].min()) < peak * 1e-24:
        raise ReferenceTooQuiet(
            "reference carries no energy in part of the analysis span")
    ratio = p_ref[span] / np.maximum(p_sig[span], peak * 1e-300)
    tl = np.clip(10.0 * np.log10(ratio), 0.0, 120.0)
    values = np.interp(freqs, bin_f[span], tl)
    return Spectrum(freqs, values, "transmission_loss_dB")


def probe_transmission_loss(design: FilterDesign, probe: ProbeSignal,
                            grid) -> Spectrum:
    """simulate_response and estimate_spectrum composed over one probe."""
    reference = probe_burst(probe)
    response = simulate_response(design, probe, grid)
    return estimate_spectrum(response, reference, grid)
