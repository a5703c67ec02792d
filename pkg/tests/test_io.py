"""Waveform container and WAV round trips."""

import numpy as np
import pytest
from scipy.io import wavfile

from flashsr.dsp.io import Waveform, read_wav, write_wav
from tests.conftest import make_tone


def test_waveform_validation():
    with pytest.raises(ValueError):
        Waveform(samples=np.zeros((2, 10)), sample_rate=16000)
    with pytest.raises(ValueError):
        Waveform(samples=np.array([]), sample_rate=16000)
    with pytest.raises(ValueError):
        Waveform(samples=np.array([0.0, np.nan]), sample_rate=16000)
    with pytest.raises(ValueError):
        Waveform(samples=np.zeros(4), sample_rate=0)
    with pytest.raises(ValueError):
        Waveform(samples=np.zeros(4), sample_rate=16000.5)


def test_waveform_properties(tone16k):
    assert len(tone16k) == 16000
    assert tone16k.duration == pytest.approx(1.0)
    assert tone16k.samples.dtype == np.float64


def test_waveform_coerces_dtype():
    w = Waveform(samples=np.zeros(8, dtype=np.float32), sample_rate=8000)
    assert w.samples.dtype == np.float64


def test_float32_round_trip(tmp_path, tone16k):
    p = tmp_path / "t.wav"
    write_wav(p, tone16k, encoding="float32")
    back = read_wav(p)
    assert back.sample_rate == 16000
    np.testing.assert_allclose(back.samples, tone16k.samples, atol=1e-7)


def test_pcm16_round_trip(tmp_path):
    tone = make_tone(440.0, 16000, 0.2, amp=0.8)
    p = tmp_path / "t.wav"
    write_wav(p, tone, encoding="pcm16")
    back = read_wav(p)
    np.testing.assert_allclose(back.samples, tone.samples, atol=1.0 / 32768.0)


def test_pcm16_clips(tmp_path):
    loud = Waveform(samples=np.array([2.0, -2.0, 0.0]), sample_rate=8000)
    p = tmp_path / "c.wav"
    write_wav(p, loud, encoding="pcm16")
    back = read_wav(p)
    assert back.samples[0] == pytest.approx(1.0 - 1.0 / 32768.0, abs=1e-9)
    assert back.samples[1] == pytest.approx(-1.0, abs=1e-9)


def test_unknown_encoding(tmp_path, tone16k):
    with pytest.raises(ValueError):
        write_wav(tmp_path / "x.wav", tone16k, encoding="mp3")


def test_stereo_downmix(tmp_path):
    left = np.linspace(-0.5, 0.5, 100).astype(np.float32)
    right = np.zeros(100, dtype=np.float32)
    wavfile.write(tmp_path / "s.wav", 8000, np.stack([left, right], axis=1))
    w = read_wav(tmp_path / "s.wav")
    np.testing.assert_allclose(w.samples, left / 2.0, atol=1e-7)


def test_int32_scaling(tmp_path):
    x = (np.array([0.25, -0.25]) * 2**31).astype(np.int32)
    wavfile.write(tmp_path / "i.wav", 8000, x)
    w = read_wav(tmp_path / "i.wav")
    np.testing.assert_allclose(w.samples, [0.25, -0.25], atol=1e-9)
