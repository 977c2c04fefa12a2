"""SNR-controlled noise mixing and seeded synthetic noise generators.

All randomness flows through numpy's PCG64 generator so that a given seed
reproduces bit-identical noise on any platform.  The noise gain solves
``g^2 = P_s / (P_n * 10^(snr/10))`` with powers measured as mean squared
amplitude over the speech extent; if the mixture peaks above 1.0 the whole
mixture (both bookkeeping components included) is rescaled to peak 1.0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from xppgpca.corpus import AudioBuffer
from xppgpca.errors import XppgError

SNR_MIN_DB = -20.0
SNR_MAX_DB = 40.0

SYNTHETIC_KINDS = ("pink", "babble")


@dataclass(frozen=True)
class MixSpec:
    """Target SNR in dB plus the seed controlling noise placement."""

    snr_db: float
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.snr_db):
            raise XppgError("mix SNR must be finite")
        if not SNR_MIN_DB <= self.snr_db <= SNR_MAX_DB:
            raise XppgError(
                f"mix SNR {self.snr_db} dB outside [{SNR_MIN_DB}, {SNR_MAX_DB}]"
            )


@dataclass(frozen=True)
class MixResult:
    """A mixture along with the components it was assembled from.

    ``mixed.samples == clean_component + noise_component`` (the normalization
    gain, when the raw mixture peaks above 1.0, is already folded into both
    components), so the realized SNR can be recomputed from the parts.
    """

    mixed: AudioBuffer
    clean_component: np.ndarray
    noise_component: np.ndarray
    noise_gain: float
    norm_gain: float

    @property
    def realized_snr_db(self) -> float:
        p_s = np.mean(self.clean_component**2)
        p_n = np.mean(self.noise_component**2)
        return float(10.0 * np.log10(p_s / p_n))


def rng_from_seed(seed: int, *spawn_key: int) -> np.random.Generator:
    """The package-wide PRNG: PCG64 keyed by a SeedSequence."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def mix_at_snr(speech: AudioBuffer, noise: AudioBuffer, spec: MixSpec) -> MixResult:
    """Mix noise into speech at an exact target SNR.

    The noise segment starts at a seeded random offset and is tiled
    circularly when shorter than the speech.  Same seed, same output,
    bit for bit.
    """
    if speech.sample_rate_hz != noise.sample_rate_hz:
        raise XppgError(
            f"sample rate mismatch: speech {speech.sample_rate_hz} Hz, "
            f"noise {noise.sample_rate_hz} Hz"
        )
    s = speech.samples
    n_all = noise.samples
    p_s = float(np.mean(s**2))
    if p_s == 0.0:
        raise XppgError("cannot mix into silent speech")
    rng = rng_from_seed(spec.seed)
    offset = int(rng.integers(0, n_all.size))
    idx = (offset + np.arange(s.size)) % n_all.size
    segment = n_all[idx]
    p_n = float(np.mean(segment**2))
    if p_n == 0.0:
        raise XppgError("noise segment is silent")
    gain = float(np.sqrt(p_s / (p_n * 10.0 ** (spec.snr_db / 10.0))))
    clean = s.copy()
    scaled_noise = gain * segment
    mixed = clean + scaled_noise
    peak = float(np.max(np.abs(mixed)))
    norm = 1.0 if peak <= 1.0 else 1.0 / peak
    if norm != 1.0:
        clean = clean * norm
        scaled_noise = scaled_noise * norm
        mixed = clean + scaled_noise
    return MixResult(
        mixed=AudioBuffer(samples=mixed, sample_rate_hz=speech.sample_rate_hz),
        clean_component=clean,
        noise_component=scaled_noise,
        noise_gain=gain,
        norm_gain=norm,
    )


def pink_noise(n_samples: int, sample_rate_hz: int, seed: int) -> AudioBuffer:
    """Peak-bounded 1/f noise via spectral shaping of white Gaussian noise."""
    if n_samples < 2:
        raise XppgError("pink noise needs at least 2 samples")
    rng = rng_from_seed(seed)
    n_bins = n_samples // 2 + 1
    spec = rng.standard_normal(n_bins) + 1j * rng.standard_normal(n_bins)
    freqs = np.fft.rfftfreq(n_samples, 1.0 / sample_rate_hz)
    spec[1:] /= np.sqrt(freqs[1:])
    spec[0] = 0.0
    x = np.fft.irfft(spec, n_samples)
    x /= np.sqrt(np.mean(x**2))
    x /= max(1.0, np.max(np.abs(x)))
    return AudioBuffer(samples=x, sample_rate_hz=sample_rate_hz)


def babble_noise(n_samples: int, sample_rate_hz: int, seed: int,
                 n_voices: int = 5) -> AudioBuffer:
    """Peak-bounded multi-voice babble.

    Each voice is a random harmonic comb (random fundamental, spectral tilt,
    and phases) synthesized in the frequency domain, over a weak white floor.
    Successive seeds give spectrally distinct realizations, which is what
    makes babble an aggressive masker for posterior-profile features.
    """
    if n_samples < 2:
        raise XppgError("babble noise needs at least 2 samples")
    rng = rng_from_seed(seed)
    n_bins = n_samples // 2 + 1
    spec = np.zeros(n_bins, dtype=complex)
    comb_width = max(1, int(round(3.0 * n_samples / sample_rate_hz)))
    for _ in range(n_voices):
        f0 = rng.uniform(80.0, 320.0)
        tilt = rng.uniform(0.6, 2.2)
        for h in range(1, 10):
            fc = h * f0
            if fc >= sample_rate_hz / 2.0 - 100.0:
                break
            center = int(round(fc * n_samples / sample_rate_hz))
            idx = np.arange(max(1, center - comb_width),
                            min(n_bins, center + comb_width + 1))
            spec[idx] += (
                rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
            ) * h ** (-tilt)
    x = np.fft.irfft(spec, n_samples)
    x += 0.03 * np.sqrt(np.mean(x**2)) * rng.standard_normal(n_samples)
    x /= np.sqrt(np.mean(x**2))
    x /= max(1.0, np.max(np.abs(x)))
    return AudioBuffer(samples=x, sample_rate_hz=sample_rate_hz)


def synthetic_noise(kind: str, n_samples: int, sample_rate_hz: int, seed: int) -> AudioBuffer:
    if kind == "pink":
        return pink_noise(n_samples, sample_rate_hz, seed)
    if kind == "babble":
        return babble_noise(n_samples, sample_rate_hz, seed)
    raise XppgError(f"unknown synthetic noise kind {kind!r}; expected one of {SYNTHETIC_KINDS}")
