"""Reduce per-utterance features to one fused static vector.

Each of the K posterior streams is pooled over time into M statistics:
order 1 is the stream mean, orders m >= 2 are central moments
(1/T) * sum_t (P_tk - mean_k)^m.  The pooled moments and the x-vector are
L2-normalized independently (so neither block dominates by scale) and
concatenated: ``[xvec / |xvec| , moments / |moments|]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from xppgpca.corpus import FeatureBundle
from xppgpca.errors import XppgError

MODES = ("both", "xvec_only", "ppg_only")

MAX_MOMENT_ORDER = 5


@dataclass(frozen=True)
class MomentConfig:
    """Pooling configuration: highest moment order to keep (1..5)."""

    max_order: int = 1

    def __post_init__(self):
        if not 1 <= self.max_order <= MAX_MOMENT_ORDER:
            raise XppgError(
                f"moment order must be in 1..{MAX_MOMENT_ORDER}, got {self.max_order}"
            )


def ppg_moments(ppg, cfg: MomentConfig) -> np.ndarray:
    """Pool a TxK posteriorgram into M*K per-stream moment statistics.

    Output is stream-major: ``[mu_1(k=0), ..., mu_M(k=0), mu_1(k=1), ...]``,
    i.e. stream k's order-m statistic lands at index ``k * M + (m - 1)``.
    """
    ppg = np.asarray(ppg, dtype=np.float64)
    if ppg.ndim != 2 or ppg.shape[0] < 1 or ppg.shape[1] < 1:
        raise XppgError("posteriorgram must be a non-empty TxK matrix")
    if not np.all(np.isfinite(ppg)):
        raise XppgError("posteriorgram contains non-finite values")
    m_max = cfg.max_order
    means = ppg.mean(axis=0)
    stats = np.empty((ppg.shape[1], m_max))
    stats[:, 0] = means
    if m_max > 1:
        centered = ppg - means
        power = centered
        for m in range(2, m_max + 1):
            power = power * centered
            stats[:, m - 1] = power.mean(axis=0)
    return stats.reshape(-1)


def l2_normalize(v) -> np.ndarray:
    """Scale to unit L2 norm; an all-zero vector passes through unchanged."""
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise XppgError("cannot normalize a vector with non-finite values")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return v.copy()
    return v / norm


def fused_dim(mode: str, cfg: MomentConfig, xvec_dim: int, ppg_streams: int) -> int:
    """Length of the fused vector for a given mode and feature dims."""
    if mode == "both":
        return xvec_dim + cfg.max_order * ppg_streams
    if mode == "xvec_only":
        return xvec_dim
    if mode == "ppg_only":
        return cfg.max_order * ppg_streams
    raise XppgError(f"unknown fusion mode {mode!r}; expected one of {MODES}")


def fuse(bundle: FeatureBundle, cfg: MomentConfig, mode: str = "both") -> np.ndarray:
    """Build the fused static vector for one utterance.

    ``both`` concatenates the normalized x-vector with the normalized moment
    block; the ``*_only`` modes return one normalized block for ablations.
    """
    if mode not in MODES:
        raise XppgError(f"unknown fusion mode {mode!r}; expected one of {MODES}")
    if mode == "xvec_only":
        return l2_normalize(np.asarray(bundle.xvec, dtype=np.float64).reshape(-1))
    moments = l2_normalize(ppg_moments(bundle.ppg, cfg))
    if mode == "ppg_only":
        return moments
    xvec = l2_normalize(np.asarray(bundle.xvec, dtype=np.float64).reshape(-1))
    return np.concatenate([xvec, moments])
