import numpy as np
import pytest

from xppgpca.corpus import AudioBuffer
from xppgpca.errors import XppgError
from xppgpca.noise import (
    MixSpec,
    babble_noise,
    mix_at_snr,
    pink_noise,
    synthetic_noise,
)

from conftest import SR


@pytest.fixture
def speech():
    t = np.arange(SR) / SR
    x = 0.5 * np.sin(2 * np.pi * 170 * t) * (0.4 + 0.6 * np.sin(2 * np.pi * 2 * t) ** 2)
    return AudioBuffer(samples=x, sample_rate_hz=SR)


@pytest.fixture
def gaussian_noise():
    rng = np.random.default_rng(8)
    x = rng.standard_normal(SR)
    return AudioBuffer(samples=0.4 * x / np.abs(x).max(), sample_rate_hz=SR)


class TestMixSpec:
    def test_range_enforced(self):
        MixSpec(snr_db=-20.0)
        MixSpec(snr_db=40.0)
        with pytest.raises(XppgError):
            MixSpec(snr_db=41.0)
        with pytest.raises(XppgError):
            MixSpec(snr_db=float("nan"))


class TestMixAtSnr:
    def test_zero_db_equal_power(self, speech, gaussian_noise):
        out = mix_at_snr(speech, gaussian_noise, MixSpec(snr_db=0.0, seed=1))
        p_s = np.mean(out.clean_component**2)
        p_n = np.mean(out.noise_component**2)
        assert abs(10 * np.log10(p_s / p_n)) < 0.01

    def test_realized_snr_matches_target(self, speech, gaussian_noise):
        for snr in (-20.0, -10.0, 0.0, 10.0, 20.0, 40.0):
            out = mix_at_snr(speech, gaussian_noise, MixSpec(snr_db=snr, seed=2))
            assert out.realized_snr_db == pytest.approx(snr, abs=0.01)

    def test_gain_closed_form_equal_powers(self):
        # equal speech and noise power: g = 10^(-snr/20) exactly
        rng = np.random.default_rng(3)
        s = np.where(np.arange(8000) % 2 == 0, 0.5, -0.5)
        n = 0.5 * np.sign(rng.standard_normal(8000))
        buf_s = AudioBuffer(samples=s, sample_rate_hz=SR)
        buf_n = AudioBuffer(samples=n, sample_rate_hz=SR)
        out = mix_at_snr(buf_s, buf_n, MixSpec(snr_db=20.0, seed=4))
        assert out.noise_gain == pytest.approx(0.1, abs=1e-12)

    def test_seed_determinism(self, speech, gaussian_noise):
        a = mix_at_snr(speech, gaussian_noise, MixSpec(snr_db=5.0, seed=11))
        b = mix_at_snr(speech, gaussian_noise, MixSpec(snr_db=5.0, seed=11))
        c = mix_at_snr(speech, gaussian_noise, MixSpec(snr_db=5.0, seed=12))
        assert np.array_equal(a.mixed.samples, b.mixed.samples)
        assert not np.array_equal(a.mixed.samples, c.mixed.samples)

    def test_mix_is_linear_in_components(self, speech, gaussian_noise):
        out = mix_at_snr(speech, gaussian_noise, MixSpec(snr_db=-10.0, seed=5))
        resid = out.mixed.samples - out.clean_component - out.noise_component
        assert np.max(np.abs(resid)) < 1e-15  # one ulp: mixed is the plain sum

    def test_peak_normalization_keeps_snr(self, speech, gaussian_noise):
        out = mix_at_snr(speech, gaussian_noise, MixSpec(snr_db=-20.0, seed=6))
        assert np.max(np.abs(out.mixed.samples)) <= 1.0
        assert out.norm_gain < 1.0
        assert out.realized_snr_db == pytest.approx(-20.0, abs=0.01)

    def test_short_noise_tiled(self, speech):
        rng = np.random.default_rng(7)
        short = AudioBuffer(samples=0.3 * rng.standard_normal(1000) / 4, sample_rate_hz=SR)
        out = mix_at_snr(speech, short, MixSpec(snr_db=10.0, seed=8))
        assert out.mixed.samples.size == speech.samples.size

    def test_silent_speech_rejected(self, gaussian_noise):
        silent = AudioBuffer(samples=np.zeros(SR), sample_rate_hz=SR)
        with pytest.raises(XppgError, match="silent"):
            mix_at_snr(silent, gaussian_noise, MixSpec(snr_db=0.0, seed=9))

    def test_silent_noise_rejected(self, speech):
        silent = AudioBuffer(samples=np.zeros(SR), sample_rate_hz=SR)
        with pytest.raises(XppgError, match="silent"):
            mix_at_snr(speech, silent, MixSpec(snr_db=0.0, seed=10))

    def test_sample_rate_mismatch(self, speech):
        other = AudioBuffer(samples=np.ones(8000) * 0.1, sample_rate_hz=8000)
        with pytest.raises(XppgError, match="sample rate"):
            mix_at_snr(speech, other, MixSpec(snr_db=0.0, seed=11))


class TestGenerators:
    @pytest.mark.parametrize("kind", ["pink", "babble"])
    def test_unit_power_and_determinism(self, kind):
        a = synthetic_noise(kind, SR, SR, seed=42)
        b = synthetic_noise(kind, SR, SR, seed=42)
        c = synthetic_noise(kind, SR, SR, seed=43)
        assert np.array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)
        assert np.max(np.abs(a.samples)) <= 1.0
        assert np.mean(a.samples**2) > 0.01  # not degenerate after peak bounding

    def test_pink_spectrum_slope(self):
        buf = pink_noise(4 * SR, SR, seed=0)
        spec = np.abs(np.fft.rfft(buf.samples)) ** 2
        freqs = np.fft.rfftfreq(4 * SR, 1 / SR)
        low = spec[(freqs > 50) & (freqs < 500)].mean()
        high = spec[(freqs > 2000) & (freqs < 6000)].mean()
        assert low > 5 * high  # energy concentrated at low frequencies

    def test_babble_profiles_differ_between_seeds(self):
        a = babble_noise(SR, SR, seed=1)
        b = babble_noise(SR, SR, seed=2)
        sa = np.abs(np.fft.rfft(a.samples))
        sb = np.abs(np.fft.rfft(b.samples))
        corr = np.corrcoef(sa, sb)[0, 1]
        assert corr < 0.8

    def test_unknown_kind(self):
        with pytest.raises(XppgError, match="kind"):
            synthetic_noise("brown", SR, SR, seed=0)
