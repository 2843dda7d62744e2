"""Acoustic tag coding: encode, probe simulation, estimation, decode."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acouforge.coding import (
    BandPlan,
    EncodeConfig,
    ProbeSignal,
    TagPayload,
    Waveform,
    decode,
    encode,
    estimate_spectrum,
    probe_burst,
    probe_transmission_loss,
    simulate_response,
)
from acouforge.core import FrequencyGrid, Spectrum
from acouforge.design import FilterDesign, QuarterWaveBranch, Tube, validate
from acouforge.errors import (
    AliasingError,
    BandOutOfRange,
    InvalidArgument,
    InvalidBandPlan,
    ReferenceTooQuiet,
)

DEFAULT = BandPlan()
# base/step = 2.25 keeps every odd branch harmonic centred between decode
# windows, so payloads up to 8 bits stay below the 0.02 m port cutoff
WIDE = BandPlan(1080.0, 480.0)
PROBE = ProbeSignal()


def bits_of(value: int, n: int) -> tuple:
    return tuple(bool((value >> (n - 1 - j)) & 1) for j in range(n))


def roundtrip(bits, plan) -> tuple:
    payload = TagPayload(bits, plan)
    grid = plan.analysis_grid(len(bits))
    tl = probe_transmission_loss(encode(payload), PROBE, grid)
    return decode(tl, plan, len(bits))


class TestPayloadValidation:
    def test_bit_count_limits(self):
        with pytest.raises(InvalidArgument):
            TagPayload(())
        with pytest.raises(InvalidArgument):
            TagPayload((True,) * 17)
        assert TagPayload((True,) * 16).to_string() == "1" * 16

    def test_threshold_must_be_positive(self):
        with pytest.raises(InvalidArgument):
            TagPayload((True,), threshold_db=0.0)

    def test_string_round_trip(self):
        p = TagPayload.from_string("1011")
        assert p.bits == (True, False, True, True)
        assert p.to_string() == "1011"
        with pytest.raises(InvalidArgument):
            TagPayload.from_string("10x1")
        with pytest.raises(InvalidArgument):
            TagPayload.from_string("")

    def test_band_plan_validation(self):
        with pytest.raises(InvalidArgument):
            BandPlan(0.0, 400.0)
        with pytest.raises(InvalidArgument):
            BandPlan(800.0, -1.0)
        assert DEFAULT.frequency(3) == 2000.0


class TestEncode:
    def test_fig_four_bit_structure(self):
        design = encode(TagPayload.from_string("1011"))
        assert validate(design) == []
        assert len(design.chain) == 5
        assert all(isinstance(p, Tube) and p.length == 0.05 for p in design.chain)
        branches = design.branches
        assert [b.attach_after for b in branches] == [1, 3, 4]
        # L = c/(4f) at 800, 1600, 2000 Hz
        assert [b.length for b in branches] == pytest.approx(
            [0.1072, 0.0536, 0.0429], abs=5e-5)
        assert all(isinstance(b, QuarterWaveBranch) for b in branches)

    def test_all_zeros_is_straight_tube(self):
        design = encode(TagPayload.from_string("0000"))
        assert design.branches == ()
        grid = DEFAULT.analysis_grid(4)
        tl = probe_transmission_loss(design, PROBE, grid)
        assert np.max(np.abs(tl.values)) < 1e-9

    def test_all_ones_lengths_decrease(self):
        design = encode(TagPayload.from_string("1111"))
        lengths = [b.length for b in design.branches]
        assert len(lengths) == 4
        assert all(a > b for a, b in zip(lengths, lengths[1:]))

    def test_sixteen_bits_exceed_cutoff(self):
        # top band 800 + 15*400 = 6800 Hz sits above the 0.02 m port cutoff
        with pytest.raises(InvalidBandPlan):
            encode(TagPayload((True,) * 16, DEFAULT))

    def test_overlapping_widths_rejected(self):
        with pytest.raises(InvalidBandPlan):
            encode(TagPayload((True, True), BandPlan(800.0, 50.0)))

    def test_harmonic_collision_rejected(self):
        # 3 * 800 = 2400 Hz is exactly band 4 of the default plan, so any
        # payload of five or more bits is undecodable under it
        for n in (5, 8):
            with pytest.raises(InvalidBandPlan):
                encode(TagPayload((True,) * n, DEFAULT))
        encode(TagPayload((True,) * 8, WIDE))  # harmonics fall between windows

    def test_config_validation(self):
        with pytest.raises(InvalidArgument):
            EncodeConfig(branch_radius=0.0)

    def test_metadata_carries_plan(self):
        design = encode(TagPayload.from_string("101"))
        assert design.metadata["band_plan_base_hz"] == 800.0
        assert design.metadata["band_plan_step_hz"] == 400.0
        assert design.metadata["bit_count"] == 3
        assert design.metadata["threshold_db"] == 10.0


class TestDecode:
    def flat(self, level: float) -> Spectrum:
        f = np.linspace(600.0, 2200.0, 321)
        return Spectrum(f, np.full(321, level), "transmission_loss_dB")

    def test_flat_zero_decodes_all_zeros(self):
        assert decode(self.flat(0.0), DEFAULT, 4) == (False,) * 4

    def test_zero_threshold_reads_ripple_as_ones(self):
        assert decode(self.flat(0.0), DEFAULT, 4, threshold_db=0.0) == (True,) * 4

    def test_single_notch_sets_one_bit(self):
        f = np.linspace(600.0, 2200.0, 321)
        v = np.zeros(321)
        v[np.abs(f - 1600.0) < 20.0] = 30.0
        got = decode(Spectrum(f, v, "transmission_loss_dB"), DEFAULT, 4)
        assert got == (False, False, True, False)

    def test_band_outside_grid(self):
        f = np.linspace(600.0, 1500.0, 181)
        spec = Spectrum(f, np.zeros(181), "transmission_loss_dB")
        with pytest.raises(BandOutOfRange):
            decode(spec, DEFAULT, 4)  # bit 3 window tops out at 2100 Hz
        assert decode(spec, DEFAULT, 2) == (False, False)

    def test_kind_checked(self):
        f = np.linspace(600.0, 2200.0, 321)
        with pytest.raises(InvalidArgument):
            decode(Spectrum(f, np.zeros(321), "impedance_magnitude"), DEFAULT, 4)

    @given(seed=st.integers(0, 2**32 - 1),
           lo=st.floats(1.0, 30.0), hi=st.floats(30.0, 80.0))
    @settings(max_examples=40, deadline=None)
    def test_threshold_monotone(self, seed, lo, hi):
        rng = np.random.default_rng(seed)
        f = np.linspace(600.0, 2200.0, 161)
        spec = Spectrum(f, rng.uniform(0.0, 60.0, 161), "transmission_loss_dB")
        low = decode(spec, DEFAULT, 4, threshold_db=lo)
        high = decode(spec, DEFAULT, 4, threshold_db=max(lo, hi))
        # raising the threshold never turns a 0-bit into a 1-bit
        assert all(not h or l for l, h in zip(low, high))


class TestProbe:
    def test_burst_is_windowed_and_deterministic(self):
        a = probe_burst(PROBE)
        b = probe_burst(PROBE)
        assert np.array_equal(a.samples, b.samples)
        assert a.samples.size == 3200
        assert a.sample_rate_hz == 16000
        assert a.samples[0] == 0.0  # Hann endpoints
        assert abs(a.samples[-1]) < 1e-12
        c = probe_burst(ProbeSignal(seed=1))
        assert not np.array_equal(a.samples, c.samples)

    def test_probe_validation(self):
        with pytest.raises(InvalidArgument):
            ProbeSignal(duration_s=0.0)
        with pytest.raises(InvalidArgument):
            ProbeSignal(sample_rate_hz=-1)
        with pytest.raises(InvalidArgument):
            ProbeSignal(duration_s=1e-4)  # too short to analyze

    def test_waveform_validation(self):
        with pytest.raises(InvalidArgument):
            Waveform(np.zeros((2, 2)), 16000)
        with pytest.raises(InvalidArgument):
            Waveform(np.zeros(4), 0)


class TestSimulateResponse:
    GRID = FrequencyGrid(600.0, 2200.0, 321)

    def test_unit_filter_passes_burst(self):
        straight = FilterDesign("pipe", 0.02, chain=(Tube(0.25, 0.02),))
        out = simulate_response(straight, PROBE, self.GRID)
        ref = probe_burst(PROBE)
        rms = float(np.sqrt(np.mean((out.samples - ref.samples) ** 2)))
        assert rms < 1e-9

    def test_notch_suppresses_band_energy(self):
        design = encode(TagPayload.from_string("1000"))
        out = simulate_response(design, PROBE, self.GRID)
        ref = probe_burst(PROBE)
        spec_out = np.abs(np.fft.rfft(out.samples)) ** 2
        spec_ref = np.abs(np.fft.rfft(ref.samples)) ** 2
        f = np.fft.rfftfreq(ref.samples.size, 1.0 / 16000)
        band = np.abs(f - 800.0) <= 5.0
        drop = 10.0 * np.log10(spec_ref[band].sum() / spec_out[band].sum())
        assert drop >= 10.0

    def test_deterministic(self):
        design = encode(TagPayload.from_string("1010"))
        a = simulate_response(design, PROBE, self.GRID)
        b = simulate_response(design, PROBE, self.GRID)
        assert np.array_equal(a.samples, b.samples)

    def test_sample_rate_guard(self):
        design = encode(TagPayload.from_string("1000"))
        with pytest.raises(AliasingError):
            simulate_response(design, ProbeSignal(sample_rate_hz=4000),
                              self.GRID)


class TestEstimateSpectrum:
    GRID = FrequencyGrid(600.0, 2200.0, 321)

    def test_identity_is_zero_db(self):
        ref = probe_burst(PROBE)
        tl = estimate_spectrum(ref, ref, self.GRID)
        assert tl.kind == "transmission_loss_dB"
        assert np.max(np.abs(tl.values)) < 1e-12

    def test_tenth_amplitude_is_twenty_db(self):
        ref = probe_burst(PROBE)
        tenth = Waveform(ref.samples / 10.0, ref.sample_rate_hz)
        tl = estimate_spectrum(tenth, ref, self.GRID)
        assert np.max(np.abs(tl.values - 20.0)) < 1e-9

    def test_mismatched_inputs(self):
        ref = probe_burst(PROBE)
        with pytest.raises(InvalidArgument):
            estimate_spectrum(Waveform(ref.samples, 8000), ref, self.GRID)
        with pytest.raises(InvalidArgument):
            estimate_spectrum(Waveform(ref.samples[:-7], 16000), ref, self.GRID)

    def test_silent_reference(self):
        ref = probe_burst(PROBE)
        silent = Waveform(np.zeros_like(ref.samples), 16000)
        with pytest.raises(ReferenceTooQuiet):
            estimate_spectrum(ref, silent, self.GRID)

    def test_clamped_to_range(self):
        ref = probe_burst(PROBE)
        silent = Waveform(np.zeros_like(ref.samples), 16000)
        tl = estimate_spectrum(silent, ref, self.GRID)
        assert np.all(tl.values == 120.0)


class TestRoundTrip:
    def test_all_sixteen_four_bit_payloads(self):
        for value in range(16):
            bits = bits_of(value, 4)
            assert roundtrip(bits, DEFAULT) == bits

    def test_sampled_long_payloads(self):
        rng = np.random.default_rng(7)
        for n in (5, 6, 7, 8):
            for _ in range(8):
                bits = tuple(bool(b) for b in rng.integers(0, 2, n))
                assert roundtrip(bits, WIDE) == bits

    def test_noise_robustness_20db(self):
        # 1000 seeded trials at 20 dB SNR: zero bit errors
        grid = DEFAULT.analysis_grid(4)
        ref = probe_burst(PROBE)
        responses = {}
        for value in range(16):
            bits = bits_of(value, 4)
            responses[bits] = simulate_response(
                encode(TagPayload(bits, DEFAULT)), PROBE, grid)
        bit_errors = 0
        for trial in range(1000):
            bits = bits_of(trial % 16, 4)
            clean = responses[bits]
            rng = np.random.default_rng(trial)
            sigma = float(np.sqrt(np.mean(clean.samples ** 2))) / 10.0
            noisy = Waveform(
                clean.samples + sigma * rng.standard_normal(clean.samples.size),
                clean.sample_rate_hz)
            got = decode(estimate_spectrum(noisy, ref, grid), DEFAULT, 4)
            bit_errors += sum(a != b for a, b in zip(bits, got))
        assert bit_errors == 0
