"""Statistics and experiment drivers.

Scores are produced per utterance, averaged to speaker-timepoint level,
and compared against perceptual ratings with Pearson correlation (two-sided
p via the t-transform).  RMSE quantifies score drift between conditions and
ICC(2,k) the reliability of rating panels.  The drivers cover the three
standard experiments: noise-robustness sweeps, utterance-subsampling
curves, and cross-corpus train/test matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import stats as _stats

from xppgpca import acoustics
from xppgpca.corpus import AudioBuffer, UtteranceRecord
from xppgpca.errors import XppgError
from xppgpca.noise import MixSpec, mix_at_snr

GroupKey = tuple[str, str]  # (speaker_id, timepoint_id)


def significance_stars(p: float) -> str:
    """Star notation: 0.05 (*), 0.01 (**), 0.001 (***), else n.s."""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return "n.s."


def pearson(x, y) -> tuple[float, float]:
    """Sample correlation with a two-sided p-value (t distribution, n-2 df)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise XppgError("pearson expects two equal-length 1-D sequences")
    n = x.size
    if n < 3:
        raise XppgError(f"need at least 3 points for a correlation, got {n}")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(xc @ xc)
    sy = float(yc @ yc)
    if sx == 0.0 or sy == 0.0:
        raise XppgError("correlation undefined for a constant sequence")
    r = float(xc @ yc / math.sqrt(sx * sy))
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(_stats.t.sf(abs(t), n - 2))
    return r, p


def rmse(x, y) -> float:
    """Root mean squared difference."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size == 0:
        raise XppgError("rmse expects two equal-length non-empty sequences")
    return float(np.sqrt(np.mean((x - y) ** 2)))


def icc_2k(ratings) -> float:
    """Two-way random-effects, average-measures intraclass correlation.

    ``ratings`` is a complete subjects x raters matrix.  With the usual
    mean-square decomposition (rows = subjects, columns = raters):
    ``(MS_R - MS_E) / (MS_R + (MS_C - MS_E) / n_subjects)``.
    """
    m = np.asarray(ratings, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 2 or m.shape[1] < 2:
        raise XppgError("ratings matrix must be at least 2 subjects x 2 raters")
    if not np.all(np.isfinite(m)):
        raise XppgError("ratings matrix has missing or non-finite cells")
    n, k = m.shape
    grand = m.mean()
    row_means = m.mean(axis=1)
    col_means = m.mean(axis=0)
    ss_rows = k * float(np.sum((row_means - grand) ** 2))
    ss_cols = n * float(np.sum((col_means - grand) ** 2))
    ss_total = float(np.sum((m - grand) ** 2))
    ss_err = ss_total - ss_rows - ss_cols
    ms_rows = ss_rows / (n - 1)
    ms_cols = ss_cols / (k - 1)
    ms_err = ss_err / ((n - 1) * (k - 1))
    if ms_rows == 0.0:
        raise XppgError("ICC undefined: no between-subject variance")
    return (ms_rows - ms_err) / (ms_rows + (ms_cols - ms_err) / n)


def aggregate(utterance_scores: Mapping[str, float],
              records: Sequence[UtteranceRecord]) -> dict[GroupKey, float]:
    """Mean utterance score per (speaker, timepoint).

    Every scored utterance must appear in the manifest; manifest utterances
    without a score are simply not aggregated (that is how subsampling
    works).
    """
    by_id = {r.utterance_id: r for r in records}
    unknown = [u for u in utterance_scores if u not in by_id]
    if unknown:
        raise XppgError(f"scored utterance not in manifest: {unknown[0]!r}")
    sums: dict[GroupKey, list[float]] = {}
    for r in records:
        if r.utterance_id in utterance_scores:
            key = (r.speaker_id, r.timepoint_id)
            sums.setdefault(key, []).append(float(utterance_scores[r.utterance_id]))
    return {key: float(np.mean(vals)) for key, vals in sums.items()}


def ratings_by_group(records: Sequence[UtteranceRecord]) -> dict[GroupKey, float]:
    """Mean perceptual rating per (speaker, timepoint), where present."""
    sums: dict[GroupKey, list[float]] = {}
    for r in records:
        if r.rating is not None:
            sums.setdefault((r.speaker_id, r.timepoint_id), []).append(r.rating)
    return {key: float(np.mean(vals)) for key, vals in sums.items()}


def correlate_with_ratings(agg_scores: Mapping[GroupKey, float],
                           ratings: Mapping[GroupKey, float]) -> tuple[int, float, float]:
    """Pearson r between aggregated scores and ratings on shared groups."""
    keys = sorted(set(agg_scores) & set(ratings))
    if len(keys) < 3:
        raise XppgError(
            f"only {len(keys)} speaker-timepoints have both scores and ratings"
        )
    x = [agg_scores[k] for k in keys]
    y = [ratings[k] for k in keys]
    r, p = pearson(x, y)
    return len(keys), r, p


@dataclass(frozen=True)
class ScoreRow:
    """One speaker-timepoint score joined with its rating."""

    speaker_id: str
    timepoint_id: str
    method_id: str
    score: float
    rating: float


def build_score_table(per_method_scores: Mapping[str, Mapping[str, float]],
                      records: Sequence[UtteranceRecord]) -> list[ScoreRow]:
    """Join per-utterance method scores with ratings at group level."""
    ratings = ratings_by_group(records)
    rows: list[ScoreRow] = []
    for method_id in sorted(per_method_scores):
        agg = aggregate(per_method_scores[method_id], records)
        for key in sorted(agg):
            if key in ratings:
                rows.append(
                    ScoreRow(key[0], key[1], method_id, agg[key], ratings[key])
                )
    return rows


class UtteranceMethod:
    """A named scorer mapping (record, audio) to one number.

    ``rmse_scale`` rescales scores before cross-condition RMSE so methods
    with a 0-100 native range (the phoneme-error family) are comparable to
    projection scores in [-1, 1].
    """

    def __init__(self, method_id: str,
                 fn: Callable[[UtteranceRecord, AudioBuffer], float],
                 rmse_scale: float = 1.0):
        self.method_id = method_id
        self.rmse_scale = rmse_scale
        self._fn = fn

    def score_utterance(self, record: UtteranceRecord, audio: AudioBuffer) -> float:
        return float(self._fn(record, audio))


BASELINE_NAMES = (
    "jitter",
    "shimmer",
    "vfo_semitones",
    "voicing_ratio",
    "hnr_db",
    "cpp_db",
    "wada_snr_db",
    "duration_s",
    "speech_rate_wpm",
)


def compute_baseline_features(record: UtteranceRecord, audio: AudioBuffer,
                              names: Sequence[str],
                              cfg: acoustics.AcousticConfig) -> dict[str, float]:
    """Compute several acoustic baselines, sharing the pitch track.

    Features that are undefined for the input (e.g. jitter with no voiced
    frames) come back as NaN rather than aborting a batch run.
    """
    for name in names:
        if name not in BASELINE_NAMES:
            raise XppgError(f"unknown baseline feature {name!r}")
    out: dict[str, float] = {}
    track = None
    cycles = None
    for name in names:
        try:
            if name in ("jitter", "shimmer", "vfo_semitones", "voicing_ratio"):
                if track is None:
                    track = acoustics.track_pitch(audio, cfg)
                if name in ("jitter", "shimmer"):
                    if cycles is None:
                        cycles = acoustics.extract_cycles(audio, track, cfg)
                    fn = acoustics.jitter if name == "jitter" else acoustics.shimmer
                    out[name] = fn(cycles)
                elif name == "vfo_semitones":
                    out[name] = acoustics.vfo_semitones(track)
                else:
                    out[name] = acoustics.voicing_ratio(track)
            elif name == "hnr_db":
                out[name] = acoustics.hnr_db(audio, cfg)
            elif name == "cpp_db":
                out[name] = acoustics.cpp_db(audio, cfg)
            elif name == "wada_snr_db":
                out[name] = acoustics.wada_snr_db(audio)
            elif name == "duration_s":
                out[name] = acoustics.duration_s(audio)
            elif name == "speech_rate_wpm":
                out[name] = acoustics.speech_rate_wpm(record.transcript, audio)
        except XppgError:
            out[name] = float("nan")
    return out


def acoustic_method(name: str, cfg: acoustics.AcousticConfig) -> UtteranceMethod:
    """Wrap one acoustic baseline as a sweep-compatible method."""

    def fn(record: UtteranceRecord, audio: AudioBuffer) -> float:
        value = compute_baseline_features(record, audio, [name], cfg)[name]
        if math.isnan(value):
            raise XppgError(f"feature {name!r} undefined for {record.utterance_id!r}")
        return value

    return UtteranceMethod(name, fn)


@dataclass(frozen=True)
class SweepRow:
    """Noise-sweep result for one (method, SNR) cell."""

    method_id: str
    snr_db: float
    n_groups: int
    r: float
    p: float
    rmse_vs_clean: float


def run_noise_sweep(records: Sequence[UtteranceRecord],
                    audio_by_id: Mapping[str, AudioBuffer],
                    methods: Sequence[UtteranceMethod],
                    snr_grid_db: Sequence[float],
                    noise_maker: Callable[[int, int, int], AudioBuffer],
                    seed: int) -> list[SweepRow]:
    """Score every method at every SNR and compare against the clean run.

    ``noise_maker(n_samples, sample_rate, seed)`` supplies the noise for one
    utterance; ``math.inf`` in the grid means the clean condition.  The RMSE
    column compares speaker-timepoint scores at each SNR to the clean ones
    (after per-method rescaling); correlation is against the manifest
    ratings.  Deterministic for a fixed seed: utterance i at grid index j
    always mixes with the same noise realization.
    """
    ratings = ratings_by_group(records)
    clean_scores = {
        m.method_id: {
            r.utterance_id: m.score_utterance(r, audio_by_id[r.utterance_id])
            for r in records
        }
        for m in methods
    }
    clean_agg = {mid: aggregate(sc, records) for mid, sc in clean_scores.items()}

    rows: list[SweepRow] = []
    for j, snr in enumerate(snr_grid_db):
        for m in methods:
            if math.isinf(snr):
                utt_scores = clean_scores[m.method_id]
            else:
                utt_scores = {}
                for i, rec in enumerate(records):
                    audio = audio_by_id[rec.utterance_id]
                    mix_seed = int(
                        np.random.SeedSequence(seed, spawn_key=(j, i)).generate_state(1)[0]
                    )
                    noise = noise_maker(audio.samples.size, audio.sample_rate_hz, mix_seed)
                    mixed = mix_at_snr(audio, noise, MixSpec(snr_db=snr, seed=mix_seed))
                    utt_scores[rec.utterance_id] = m.score_utterance(rec, mixed.mixed)
            agg = aggregate(utt_scores, records)
            n, r, p = correlate_with_ratings(agg, ratings)
            keys = sorted(set(agg) & set(clean_agg[m.method_id]))
            drift = rmse(
                [agg[k] * m.rmse_scale for k in keys],
                [clean_agg[m.method_id][k] * m.rmse_scale for k in keys],
            )
            rows.append(SweepRow(m.method_id, snr, n, r, p, drift))
    return rows


@dataclass(frozen=True)
class SubsampleRow:
    """Subsampling-curve point: utterances per speaker vs correlation."""

    n_utterances: int
    mean_r: float
    ci_low: float
    ci_high: float


def run_subsample_curve(utterance_scores: Mapping[str, float],
                        records: Sequence[UtteranceRecord],
                        n_grid: Sequence[int],
                        repeats: int,
                        seed: int) -> list[SubsampleRow]:
    """Correlation as a function of utterances sampled per speaker-timepoint.

    For each repeat, n utterances are drawn without replacement within every
    group before aggregation; the confidence band is the normal
    approximation mean +- 1.96 * sd / sqrt(repeats).  Sampling the full pool
    makes every repeat identical, so the band collapses to zero width.
    """
    if repeats < 2:
        raise XppgError("need at least 2 repeats for a confidence interval")
    ratings = ratings_by_group(records)
    groups: dict[GroupKey, list[str]] = {}
    for r in records:
        if r.utterance_id in utterance_scores:
            groups.setdefault((r.speaker_id, r.timepoint_id), []).append(r.utterance_id)
    if not groups:
        raise XppgError("no scored utterances to subsample")
    pool_min = min(len(ids) for ids in groups.values())
    bad = [n for n in n_grid if not 1 <= n <= pool_min]
    if bad:
        raise XppgError(
            f"subsample size {bad[0]} outside 1..{pool_min} "
            "(the smallest per-group pool)"
        )
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    rows: list[SubsampleRow] = []
    for n in n_grid:
        rs = []
        for _ in range(repeats):
            sampled: dict[str, float] = {}
            for key in sorted(groups):
                ids = groups[key]
                take = ids if n == len(ids) else [
                    ids[i] for i in rng.choice(len(ids), size=n, replace=False)
                ]
                for u in take:
                    sampled[u] = utterance_scores[u]
            agg = aggregate(sampled, records)
            _, r, _ = correlate_with_ratings(agg, ratings)
            rs.append(r)
        if all(r == rs[0] for r in rs):
            # exhausting the pool repeats the same draw; the band is exactly 0
            mean_r, sd = rs[0], 0.0
        else:
            mean_r = float(np.mean(rs))
            sd = float(np.std(rs, ddof=1))
        half = 1.96 * sd / math.sqrt(repeats)
        rows.append(SubsampleRow(n, mean_r, mean_r - half, mean_r + half))
    return rows


@dataclass(frozen=True)
class FusedCorpus:
    """A corpus reduced to fused vectors, ready for fitting or scoring."""

    name: str
    ids: tuple[str, ...]
    matrix: np.ndarray
    records: tuple[UtteranceRecord, ...]

    def __post_init__(self):
        if len(self.ids) != self.matrix.shape[0]:
            raise XppgError(
                f"corpus {self.name!r}: {len(self.ids)} ids but "
                f"{self.matrix.shape[0]} fused vectors"
            )


def run_cross_matrix(train: Sequence[FusedCorpus],
                     test: Sequence[FusedCorpus],
                     rank: int | None = None,
                     center: bool = True) -> dict[tuple[str, str], tuple[int, float, float]]:
    """Fit a model per training corpus and correlate on every test corpus.

    Returns ``{(train_name, test_name): (n_groups, r, p)}`` with r signed as
    computed; consumers compare magnitudes.
    """
    from xppgpca.pca import fit_pca, transform

    if not train or not test:
        raise XppgError("need at least one training and one test corpus")
    out: dict[tuple[str, str], tuple[int, float, float]] = {}
    for tr in train:
        model = fit_pca(tr.matrix, rank=rank, center=center)
        for te in test:
            if te.matrix.shape[1] != model.dim:
                raise XppgError(
                    f"corpus {te.name!r} has dimension {te.matrix.shape[1]}, "
                    f"model from {tr.name!r} expects {model.dim}"
                )
            proj = transform(model, te.matrix)[:, 0]
            scores = {u: float(s) for u, s in zip(te.ids, proj)}
            agg = aggregate(scores, list(te.records))
            n, r, p = correlate_with_ratings(agg, ratings_by_group(list(te.records)))
            out[(tr.name, te.name)] = (n, r, p)
    return out
