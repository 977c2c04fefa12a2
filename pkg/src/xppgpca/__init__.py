"""Reference-free speech severity evaluation.

The core pipeline reduces each utterance to a fixed-length vector (an
L2-normalized speaker embedding concatenated with L2-normalized central
moments of a phonetic posteriorgram), fits an unsupervised PCA over a
corpus of such vectors, and scores severity by projection onto the first
principal component.  Around that sit classic reference-free acoustic
baselines (jitter, shimmer, HNR, CPP, WADA-SNR, ...), reference-based
phoneme error rates, SNR-controlled noise mixing, and an evaluation
harness (Pearson/RMSE/ICC, noise sweeps, subsampling curves,
cross-corpus training matrices).

Subpackages
-----------
corpus       manifests, WAV reading, the XPGF feature-matrix file format
fusion       posterior moment pooling, L2 normalization, fusion
pca          PCA fit / scoring / model serialization
acoustics    pitch tracking and voice-quality / shortcut features
refmetrics   Levenshtein alignment and phoneme error rates
noise        SNR-controlled mixing and synthetic noise generators
evaluation   statistics and experiment drivers
synth        hermetic planted-factor synthetic corpus
cli          the ``xppg`` command-line entry point
"""

from xppgpca.corpus import (
    AudioBuffer,
    FeatureBundle,
    UtteranceRecord,
    load_manifest,
    read_feature_file,
    read_wav,
    write_feature_file,
)
from xppgpca.errors import XppgError
from xppgpca.fusion import MomentConfig, fuse, l2_normalize, ppg_moments
from xppgpca.pca import PcaModel, fit_pca, load_model, save_model, score

__all__ = [
    "AudioBuffer",
    "FeatureBundle",
    "MomentConfig",
    "PcaModel",
    "UtteranceRecord",
    "XppgError",
    "fit_pca",
    "fuse",
    "l2_normalize",
    "load_manifest",
    "load_model",
    "ppg_moments",
    "read_feature_file",
    "read_wav",
    "save_model",
    "score",
    "write_feature_file",
]
