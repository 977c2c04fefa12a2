"""Reference-free acoustic features computed straight from the waveform.

Pitch is tracked with a normalized cross-correlation per frame (peak within
the configured lag range, parabolic refinement, fixed voicing threshold).
On top of the track sit the classic voice-quality measures: jitter and
shimmer over extracted glottal cycles, fundamental-frequency variation in
semitones, voicing ratio, and harmonics-to-noise ratio.  CPP and WADA-SNR
are computed directly from the signal, as are the recording-length
"shortcut" features (duration, speech rate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from xppgpca.corpus import AudioBuffer
from xppgpca.errors import XppgError


@dataclass(frozen=True)
class AcousticConfig:
    """Frozen analysis constants.

    The 60-400 Hz range covers male and female pathological voices; frames
    must span at least two periods of ``f0_min_hz`` so the correlation
    window at the longest candidate lag stays non-empty.  CPP uses its own,
    much longer window: rahmonic prominence needs many periods per frame.
    """

    f0_min_hz: float = 60.0
    f0_max_hz: float = 400.0
    frame_s: float = 0.04
    hop_s: float = 0.01
    voicing_threshold: float = 0.45
    cpp_frame_s: float = 0.20
    cpp_hop_s: float = 0.02

    def __post_init__(self):
        if not 0 < self.f0_min_hz < self.f0_max_hz:
            raise XppgError("need 0 < f0_min < f0_max")
        if self.frame_s * self.f0_min_hz < 2.0:
            raise XppgError(
                "frame must cover at least two periods of f0_min "
                f"({self.frame_s * 1e3:.0f} ms at {self.f0_min_hz} Hz does not)"
            )
        if not 0 < self.hop_s <= self.frame_s:
            raise XppgError("hop must be positive and no longer than the frame")
        if not 0.0 < self.voicing_threshold < 1.0:
            raise XppgError("voicing threshold must lie in (0, 1)")


@dataclass(frozen=True)
class PitchTrack:
    """Per-frame f0 (NaN when unvoiced) and correlation peak strength."""

    frame_times: np.ndarray
    f0_hz: np.ndarray
    voicing_strength: np.ndarray

    @property
    def voiced(self) -> np.ndarray:
        return ~np.isnan(self.f0_hz)

    @property
    def n_frames(self) -> int:
        return self.f0_hz.size


@dataclass(frozen=True)
class CycleSeries:
    """Glottal cycle lengths (s) and peak-to-peak amplitudes, paired."""

    periods: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.periods, dtype=np.float64)
        a = np.asarray(self.amplitudes, dtype=np.float64)
        if p.shape != a.shape or p.ndim != 1:
            raise XppgError("periods and amplitudes must be 1-D and the same length")
        if p.size and (np.min(p) <= 0 or np.min(a) <= 0):
            raise XppgError("cycle periods and amplitudes must be positive")
        object.__setattr__(self, "periods", p)
        object.__setattr__(self, "amplitudes", a)

    def __len__(self) -> int:
        return self.periods.size


def _frame_count(n_samples: int, frame: int, hop: int) -> int:
    return (n_samples - frame) // hop + 1


def track_pitch(audio: AudioBuffer, cfg: AcousticConfig = AcousticConfig()) -> PitchTrack:
    """Autocorrelation pitch track.

    Each frame is mean-removed and correlated against itself over the lag
    range [1/f0_max, 1/f0_min] (normalized cross-correlation, so a perfectly
    periodic frame scores 1.0 regardless of where the frame starts).  The
    best peak is refined parabolically; the frame is voiced iff the refined
    peak reaches the voicing threshold.
    """
    sr = audio.sample_rate_hz
    x = audio.samples
    frame = int(round(cfg.frame_s * sr))
    hop = int(round(cfg.hop_s * sr))
    if x.size < frame:
        raise XppgError(
            f"audio ({x.size} samples) shorter than one analysis frame ({frame})"
        )
    lag_min = max(1, int(math.floor(sr / cfg.f0_max_hz)))
    lag_max = int(math.ceil(sr / cfg.f0_min_hz))
    if lag_max >= frame:
        raise XppgError("frame too short for the configured f0 range")
    n_frames = _frame_count(x.size, frame, hop)
    window = frame - lag_max

    f0 = np.full(n_frames, np.nan)
    strength = np.zeros(n_frames)
    times = (np.arange(n_frames) * hop + frame / 2.0) / sr

    lags = np.arange(lag_max + 1)
    for i in range(n_frames):
        seg = x[i * hop: i * hop + frame]
        seg = seg - seg.mean()
        head = seg[:window]
        csum = np.concatenate(([0.0], np.cumsum(seg * seg)))
        energies = csum[lags + window] - csum[lags]
        cross = sliding_window_view(seg, window)[: lag_max + 1] @ head
        denom = np.sqrt(energies[0] * energies)
        r = np.divide(cross, denom, out=np.zeros_like(cross), where=denom > 0)
        tau = lag_min + int(np.argmax(r[lag_min: lag_max + 1]))
        r0 = r[tau]
        tau_ref, r_ref = float(tau), float(r0)
        if lag_min < tau < lag_max:
            rm, rp = r[tau - 1], r[tau + 1]
            curv = rm - 2.0 * r0 + rp
            if curv < 0:
                delta = 0.5 * (rm - rp) / curv
                tau_ref = tau + delta
                r_ref = float(r0 - 0.25 * (rm - rp) * delta)
        strength[i] = min(max(r_ref, 0.0), 1.0)
        if strength[i] >= cfg.voicing_threshold:
            f0[i] = min(max(sr / tau_ref, cfg.f0_min_hz), cfg.f0_max_hz)
    return PitchTrack(frame_times=times, f0_hz=f0, voicing_strength=strength)


def extract_cycles(audio: AudioBuffer, track: PitchTrack,
                   cfg: AcousticConfig = AcousticConfig()) -> CycleSeries:
    """Locate glottal cycles by waveform peak picking seeded from the track.

    Within each contiguous voiced region, successive waveform maxima are
    chased one expected period at a time; cycle length is the spacing of
    consecutive peaks and cycle amplitude the peak-to-peak excursion from
    the cycle's peak down to its deepest trough before the next peak.
    No voiced frames yields an empty series.
    """
    sr = audio.sample_rate_hz
    x = audio.samples
    hop = int(round(cfg.hop_s * sr))
    frame = int(round(cfg.frame_s * sr))
    voiced = track.voiced
    periods: list[float] = []
    amps: list[float] = []

    i = 0
    n = track.n_frames
    while i < n:
        if not voiced[i]:
            i += 1
            continue
        j = i
        while j < n and voiced[j]:
            j += 1
        start = i * hop
        end = min((j - 1) * hop + frame, x.size)
        centers = track.frame_times[i:j] * sr
        f0s = track.f0_hz[i:j]

        def period_at(pos: float) -> float:
            k = int(np.argmin(np.abs(centers - pos)))
            return sr / f0s[k]

        period = period_at(start)
        first_span = x[start: min(end, start + int(round(1.5 * period)))]
        if first_span.size == 0:
            i = j
            continue
        peak = start + int(np.argmax(first_span))
        while True:
            period = period_at(peak)
            lo = peak + int(round(0.7 * period))
            hi = peak + int(round(1.3 * period))
            if hi > end:
                break
            nxt = lo + int(np.argmax(x[lo:hi]))
            span = x[peak:nxt]  # end-exclusive: the next peak opens the next cycle
            t_cycle = (nxt - peak) / sr
            a_cycle = float(x[peak] - span.min())
            if t_cycle > 0 and a_cycle > 0:
                periods.append(t_cycle)
                amps.append(a_cycle)
            peak = nxt
        i = j
    return CycleSeries(periods=np.array(periods), amplitudes=np.array(amps))


def _relative_step_mean(values: np.ndarray, what: str) -> float:
    if values.size < 2:
        raise XppgError(f"need at least 2 cycles to compute {what}")
    return float(np.mean(np.abs(np.diff(values)) / values[:-1]))


def jitter(cycles: CycleSeries) -> float:
    """Mean relative cycle-to-cycle period variation."""
    return _relative_step_mean(cycles.periods, "jitter")


def shimmer(cycles: CycleSeries) -> float:
    """Mean relative cycle-to-cycle amplitude variation."""
    return _relative_step_mean(cycles.amplitudes, "shimmer")


def vfo_semitones(track: PitchTrack) -> float:
    """f0 variability in semitones: 39.86 * log10((mu + sigma) / mu).

    Sigma is the population standard deviation over voiced frames.
    """
    f0 = track.f0_hz[track.voiced]
    if f0.size < 2:
        raise XppgError("need at least 2 voiced frames for f0 variation")
    mu = float(np.mean(f0))
    sigma = float(np.std(f0))
    return 39.86 * math.log10((mu + sigma) / mu)


def voicing_ratio(track: PitchTrack) -> float:
    """Fraction of frames classified voiced."""
    if track.n_frames == 0:
        raise XppgError("empty pitch track")
    return float(np.mean(track.voiced))


def hnr_db(audio: AudioBuffer, cfg: AcousticConfig = AcousticConfig()) -> float:
    """Harmonics-to-noise ratio from the correlation peak.

    Per voiced frame r is the normalized-autocorrelation peak and the frame
    HNR is 10*log10(r / (1 - r)); the utterance value is the mean over
    voiced frames.  r is clamped to [1e-6, 1 - 1e-6] so perfectly periodic
    input stays finite.
    """
    track = track_pitch(audio, cfg)
    r = track.voicing_strength[track.voiced]
    if r.size == 0:
        raise XppgError("no voiced frames; HNR undefined")
    r = np.clip(r, 1e-6, 1.0 - 1e-6)
    return float(np.mean(10.0 * np.log10(r / (1.0 - r))))


def cpp_frames(audio: AudioBuffer, cfg: AcousticConfig = AcousticConfig()) \
        -> tuple[np.ndarray, np.ndarray]:
    """Per-frame cepstral peak prominence and its peak quefrency.

    Each frame: Hann window, magnitude spectrum in dB, real cepstrum, then a
    least-squares line over quefrencies [1 ms, 1/f0_min]; the frame's CPP is
    the cepstral peak within [1/f0_max, 1/f0_min] minus the line's value at
    the peak.  All-silent frames contribute 0.
    """
    sr = audio.sample_rate_hz
    x = audio.samples
    frame = int(round(cfg.cpp_frame_s * sr))
    hop = int(round(cfg.cpp_hop_s * sr))
    if x.size < frame:
        raise XppgError(
            f"audio ({x.size} samples) shorter than one CPP window ({frame})"
        )
    nfft = 1
    while nfft < 2 * frame:
        nfft *= 2
    win = np.hanning(frame)
    quefs = np.arange(nfft) / sr
    peak_lo = int(math.ceil(sr / cfg.f0_max_hz))
    peak_hi = int(math.floor(sr / cfg.f0_min_hz))
    trend_lo = int(math.ceil(sr * 1e-3))
    design = np.vstack(
        [np.ones(peak_hi + 1 - trend_lo), quefs[trend_lo: peak_hi + 1]]
    ).T
    n_frames = _frame_count(x.size, frame, hop)
    values = np.zeros(n_frames)
    peak_q = np.full(n_frames, np.nan)
    for i in range(n_frames):
        seg = x[i * hop: i * hop + frame]
        seg = (seg - seg.mean()) * win
        mag = np.abs(np.fft.rfft(seg, nfft))
        top = mag.max()
        if top == 0.0:
            continue
        # scale-relative floor keeps CPP exactly level-invariant
        log_mag = 20.0 * np.log10(np.maximum(mag, 1e-10 * top))
        ceps = np.fft.irfft(log_mag, nfft)
        coef, *_ = np.linalg.lstsq(design, ceps[trend_lo: peak_hi + 1], rcond=None)
        k = peak_lo + int(np.argmax(ceps[peak_lo: peak_hi + 1]))
        values[i] = ceps[k] - (coef[0] + coef[1] * quefs[k])
        peak_q[i] = quefs[k]
    return values, peak_q


def cpp_db(audio: AudioBuffer, cfg: AcousticConfig = AcousticConfig()) -> float:
    """Mean cepstral peak prominence over frames, in dB."""
    values, _ = cpp_frames(audio, cfg)
    return float(np.mean(values))


# dB -> gamma-statistic table from the published WADA reference
# implementation (Kim & Stern); the statistic is ln(E|z|) - E[ln|z|].
_WADA_DB = np.arange(-20, 101, dtype=np.float64)
_WADA_G = np.array([
    0.40974774, 0.40986926, 0.40998566, 0.40969089, 0.40986186,
    0.40999006, 0.41027138, 0.41052627, 0.41101024, 0.41143264,
    0.41231718, 0.41337272, 0.41526426, 0.4178192, 0.42077252,
    0.42452799, 0.42918886, 0.43510373, 0.44234195, 0.45161485,
    0.46221153, 0.47491647, 0.48883809, 0.50509236, 0.52353709,
    0.54372088, 0.56532427, 0.58847532, 0.61346212, 0.63954496,
    0.66750818, 0.69583724, 0.72454762, 0.75414799, 0.78323148,
    0.81240985, 0.84219775, 0.87166406, 0.90030504, 0.92880418,
    0.95655449, 0.9835349, 1.01047155, 1.0362095, 1.06136425,
    1.08579312, 1.1094819, 1.13277995, 1.15472826, 1.17627308,
    1.19703503, 1.21671694, 1.23535898, 1.25364313, 1.27103891,
    1.28718029, 1.30302865, 1.31839527, 1.33294817, 1.34700935,
    1.3605727, 1.37345513, 1.38577122, 1.39733504, 1.40856397,
    1.41959619, 1.42983624, 1.43958467, 1.44902176, 1.45804831,
    1.46669568, 1.47486938, 1.48269965, 1.49034339, 1.49748214,
    1.50435106, 1.51076426, 1.51698915, 1.5229097, 1.52857204,
    1.53389941, 1.5389735, 1.54383818, 1.54826476, 1.5527934,
    1.55703964, 1.56085054, 1.56488131, 1.56844697, 1.57189484,
    1.57510856, 1.57812359, 1.58106135, 1.58397163, 1.58654344,
    1.58908293, 1.59143733, 1.59373721, 1.59598081, 1.59792389,
    1.59988422, 1.60168636, 1.60340509, 1.60510328, 1.60663848,
    1.60814267, 1.60959077, 1.61095573, 1.61225365, 1.61349278,
    1.61470441, 1.61575776, 1.61686646, 1.61784439, 1.61885473,
    1.61976745, 1.62063712, 1.62153459, 1.62230656, 1.62306058,
    1.62378232,
])


def wada_snr_db(audio: AudioBuffer) -> float:
    """Blind SNR estimate from the waveform amplitude distribution.

    Computes the gamma statistic ln(E|z|) - E[ln|z|] of the peak-normalized
    waveform and inverts it through the published lookup table (last
    crossing, linear interpolation between rows; the table's first rows are
    not monotone).  Clamped to the table range [-20, 100] dB.
    """
    x = audio.samples
    peak = np.max(np.abs(x))
    if peak == 0.0:
        raise XppgError("cannot estimate SNR of all-zero audio")
    ax = np.abs(x) / peak
    ax = np.maximum(ax, 1e-10)
    g = float(np.log(np.mean(ax)) - np.mean(np.log(ax)))
    below = np.nonzero(_WADA_G < g)[0]
    if below.size == 0:
        return float(_WADA_DB[0])
    idx = int(below[-1])
    if idx + 1 >= _WADA_G.size:
        return float(_WADA_DB[-1])
    g0, g1 = _WADA_G[idx], _WADA_G[idx + 1]
    frac = (g - g0) / (g1 - g0)
    return float(_WADA_DB[idx] + frac * (_WADA_DB[idx + 1] - _WADA_DB[idx]))


def duration_s(audio: AudioBuffer) -> float:
    """Recording length in seconds."""
    return audio.duration_s


def speech_rate_wpm(transcript: str, audio: AudioBuffer) -> float:
    """Whitespace-token count divided by the duration in minutes."""
    words = transcript.split()
    if not words:
        raise XppgError("cannot compute speech rate for an empty transcript")
    return len(words) / (audio.duration_s / 60.0)
