import numpy as np
import pytest

from xppgpca.corpus import AudioBuffer

SR = 16000


@pytest.fixture
def sine_150hz() -> AudioBuffer:
    t = np.arange(SR) / SR
    return AudioBuffer(samples=0.8 * np.sin(2 * np.pi * 150.0 * t), sample_rate_hz=SR)


@pytest.fixture
def white_noise() -> AudioBuffer:
    rng = np.random.default_rng(1234)
    x = rng.standard_normal(SR)
    return AudioBuffer(samples=0.5 * x / np.abs(x).max(), sample_rate_hz=SR)


def make_manifest(tmp_path, rows):
    """Write a manifest plus dummy wavs; rows are partial column dicts."""
    from xppgpca.corpus import write_wav

    lines = ["utterance_id,speaker_id,timepoint_id,wav_path,transcript,phoneme_ref,rating"]
    wav_dir = tmp_path / "wav"
    wav_dir.mkdir(exist_ok=True)
    t = np.arange(SR // 4) / SR
    tone = AudioBuffer(samples=0.5 * np.sin(2 * np.pi * 220 * t), sample_rate_hz=SR)
    for row in rows:
        utt = row["utterance_id"]
        wav = row.get("wav_path", f"wav/{utt}.wav")
        if not (tmp_path / wav).exists() and not row.get("skip_wav"):
            write_wav(tone, tmp_path / wav)
        lines.append(
            ",".join(
                [
                    utt,
                    row.get("speaker_id", "spk0"),
                    row.get("timepoint_id", "t0"),
                    wav,
                    row.get("transcript", ""),
                    row.get("phoneme_ref", ""),
                    row.get("rating", ""),
                ]
            )
        )
    path = tmp_path / "manifest.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
