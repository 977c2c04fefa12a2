"""Voice-quality and shortcut features on synthetic test signals.

Shows how the reference-free acoustic baselines behave on signals with
known properties: a clean tone, a jittery tone, and white noise.
"""

import numpy as np

from xppgpca.acoustics import (
    AcousticConfig,
    cpp_db,
    duration_s,
    extract_cycles,
    hnr_db,
    jitter,
    shimmer,
    speech_rate_wpm,
    track_pitch,
    vfo_semitones,
    voicing_ratio,
    wada_snr_db,
)
from xppgpca.corpus import AudioBuffer

SR = 16000
t = np.arange(SR) / SR
cfg = AcousticConfig()


def describe(name, buf):
    track = track_pitch(buf, cfg)
    vr = voicing_ratio(track)
    print(f"\n== {name}")
    print(f"   voicing ratio     {vr:.2f}")
    if vr > 0.1:
        cycles = extract_cycles(buf, track, cfg)
        print(f"   cycles found      {len(cycles)}")
        print(f"   jitter            {jitter(cycles) * 100:.2f}%")
        print(f"   shimmer           {shimmer(cycles) * 100:.2f}%")
        print(f"   f0 variation      {vfo_semitones(track):.2f} semitones")
        print(f"   HNR               {hnr_db(buf, cfg):.1f} dB")
    print(f"   CPP               {cpp_db(buf, cfg):.1f} dB")
    print(f"   WADA SNR          {wada_snr_db(buf):.1f} dB")
    print(f"   duration          {duration_s(buf):.2f} s")


# a clean 140 Hz tone: fully voiced, near-zero jitter, high HNR
clean = AudioBuffer(samples=0.7 * np.sin(2 * np.pi * 140 * t), sample_rate_hz=SR)
describe("clean 140 Hz tone", clean)

# the same tone with 3% random cycle-length perturbation: jitter shows it
rng = np.random.default_rng(3)
cycle = SR // 140
wobble = np.repeat(rng.standard_normal(SR // cycle + 1), cycle)[:SR]
phase = np.cumsum(2 * np.pi * 140 * (1 + 0.03 * wobble) / SR)
rough = AudioBuffer(samples=0.7 * np.sin(phase), sample_rate_hz=SR)
describe("tone with 3% cycle perturbation", rough)

# white noise: unvoiced, low CPP, WADA pegs it as noise
raw = rng.standard_normal(SR)
noise = AudioBuffer(samples=0.6 * raw / np.abs(raw).max(), sample_rate_hz=SR)
describe("white noise", noise)

# the transcript-based shortcut feature
print(f"\nspeech rate for 12 words over {duration_s(clean):.0f} s: "
      f"{speech_rate_wpm('w ' * 12, clean):.0f} wpm")
