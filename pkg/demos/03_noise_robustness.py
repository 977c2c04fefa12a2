"""Noise-robustness sweep on the synthetic corpus.

Mixes seeded babble into every utterance at a ladder of SNRs, rescores
with the band-posterior encoder + PCA pipeline, and reports how the
correlation with the planted severity decays, plus the score drift
(RMSE) relative to the clean condition.
"""

import math
import tempfile
from pathlib import Path

import numpy as np

from xppgpca.corpus import load_manifest, read_wav
from xppgpca.evaluation import run_noise_sweep
from xppgpca.fusion import MomentConfig, fuse
from xppgpca.noise import babble_noise
from xppgpca.pca import fit_pca
from xppgpca.synth import SynthConfig, encode_band_features, encoder_method, generate_corpus

work = Path(tempfile.mkdtemp(prefix="xppg_noise_"))
print(f"corpus under {work} ...")
records = generate_corpus(work, seed=21, cfg=SynthConfig(n_speakers=10, n_utterances=12))
audio = {r.utterance_id: read_wav(r.wav_path) for r in records}

cfg = MomentConfig(1)
clean = np.array(
    [fuse(encode_band_features(audio[r.utterance_id]), cfg, "both") for r in records]
)
method = encoder_method(fit_pca(clean), cfg)

grid = [math.inf, 40.0, 20.0, 10.0, 0.0, -10.0, -20.0]
rows = run_noise_sweep(
    records, audio, [method], grid,
    lambda n, sr, seed: babble_noise(n, sr, seed), seed=5,
)

print("\n   SNR      |r|    RMSE vs clean")
for row in rows:
    label = "clean" if math.isinf(row.snr_db) else f"{row.snr_db:+.0f} dB"
    print(f"{label:>8}   {abs(row.r):.3f}   {row.rmse_vs_clean:.4f}")
print("\nexpected shape: |r| holds up at high SNR, then collapses once the"
      "\nbabble drowns the voice (at very low SNR the correlation is itself"
      "\nnoise); RMSE grows monotonically as the mixtures get noisier.")
