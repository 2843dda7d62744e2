"""CSV and WAV byte contracts."""

import numpy as np
import pytest

from acouforge.core import FrequencyGrid, Spectrum
from acouforge.design import demo_design, design_transmission_loss
from acouforge.errors import InvalidArgument, ParseError
from acouforge.formats import (
    parse_spectrum_csv,
    parse_wav,
    spectrum_to_csv,
    wav_bytes,
)

GRID = FrequencyGrid(200.0, 1500.0, 521)


def demo_spectrum() -> Spectrum:
    return design_transmission_loss(demo_design(), GRID)


class TestSpectrumCsv:
    def test_header_and_row_count(self):
        lines = spectrum_to_csv(demo_spectrum()).splitlines()
        assert lines[0] == "frequency_hz,value"
        assert len(lines) == 1 + GRID.count

    def test_round_trip_is_exact(self):
        spectrum = demo_spectrum()
        again = parse_spectrum_csv(spectrum_to_csv(spectrum))
        assert np.array_equal(again.frequencies, spectrum.frequencies)
        assert np.array_equal(again.values, spectrum.values)
        assert again.kind == "transmission_loss_dB"

    def test_full_precision_rows(self):
        spectrum = Spectrum(np.array([1.0 / 3.0, 2.0]),
                            np.array([0.1, 1e-17]), "transmission_loss_dB")
        text = spectrum_to_csv(spectrum)
        assert "0.3333333333333333,0.1" in text
        assert "2.0,1e-17" in text

    def test_lf_line_endings(self):
        text = spectrum_to_csv(demo_spectrum())
        assert "\r" not in text
        assert text.endswith("\n")

    def test_deterministic(self):
        assert spectrum_to_csv(demo_spectrum()) \
            == spectrum_to_csv(demo_spectrum())

    def test_parse_skips_blank_lines(self):
        spectrum = parse_spectrum_csv("frequency_hz,value\n1.0,2.0\n\n3.0,4.0\n")
        assert spectrum.frequencies.tolist() == [1.0, 3.0]

    def test_parse_rejects_bad_header(self):
        with pytest.raises(ParseError) as err:
            parse_spectrum_csv("freq,val\n1.0,2.0\n")
        assert err.value.line == 1

    def test_parse_rejects_wrong_arity(self):
        with pytest.raises(ParseError) as err:
            parse_spectrum_csv("frequency_hz,value\n1.0,2.0\n3.0\n")
        assert err.value.line == 3

    def test_parse_rejects_non_numbers(self):
        with pytest.raises(ParseError) as err:
            parse_spectrum_csv("frequency_hz,value\n1.0,loud\n")
        assert err.value.line == 2

    def test_parse_rejects_empty_table(self):
        with pytest.raises(ParseError):
            parse_spectrum_csv("frequency_hz,value\n")


class TestWav:
    def tone(self, n=1000):
        return 0.5 * np.sin(2 * np.pi * 440.0 * np.arange(n) / 44100.0)

    def test_riff_header_and_length(self):
        data = wav_bytes(self.tone())
        assert data[:4] == b"RIFF"
        assert data[8:12] == b"WAVE"
        assert len(data) == 44 + 2 * 1000

    def test_round_trip_within_quantization(self):
        samples = self.tone()
        decoded, rate = parse_wav(wav_bytes(samples))
        assert rate == 44100.0
        assert decoded.shape == samples.shape
        assert np.max(np.abs(decoded - samples)) <= 0.5 / 32767 + 1e-12

    def test_deterministic(self):
        assert wav_bytes(self.tone()) == wav_bytes(self.tone())

    def test_clips_out_of_range(self):
        decoded, _ = parse_wav(wav_bytes(np.array([2.0, -2.0])))
        assert decoded.tolist() == [1.0, -1.0]

    def test_sample_rate_passthrough(self):
        _, rate = parse_wav(wav_bytes(self.tone(), sample_rate_hz=16000.0))
        assert rate == 16000.0

    def test_rejects_bad_input(self):
        with pytest.raises(InvalidArgument):
            wav_bytes(np.zeros((2, 3)))
        with pytest.raises(InvalidArgument):
            wav_bytes(np.array([np.nan]))
        with pytest.raises(InvalidArgument):
            wav_bytes(self.tone(), sample_rate_hz=0.0)

    def test_parse_rejects_garbage(self):
        with pytest.raises(ParseError):
            parse_wav(b"not a RIFF stream")

    def test_parse_rejects_stereo(self):
        import io
        import wave

        buffer = io.BytesIO()
        with wave.open(buffer, "wb") as writer:
            writer.setnchannels(2)
            writer.setsampwidth(2)
            writer.setframerate(44100)
            writer.writeframes(b"\x00\x00" * 8)
        with pytest.raises(ParseError):
            parse_wav(buffer.getvalue())
