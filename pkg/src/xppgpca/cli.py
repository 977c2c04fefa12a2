"""The ``xppg`` command line: reproducible pipelines over the library.

Subcommands: synth-corpus, fuse, fit, score, baseline, refmetric,
noise-mix, evaluate, subsample, cross-matrix.  Option precedence is
CLI flag > config file (flat ``key = value`` lines) > built-in default.
Randomized commands require an explicit seed; outputs never embed
timestamps, so identical inputs and seeds reproduce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from xppgpca import acoustics, corpus, evaluation, fusion, noise, pca, refmetrics, synth
from xppgpca.errors import XppgError

_SCORE_FMT = ".17g"
_STAT_FMT = ".10g"


def _fmt(value: float, spec: str = _STAT_FMT) -> str:
    return format(float(value), spec)


def parse_kv_file(path) -> dict[str, str]:
    """Flat ``key = value`` config; blank lines and # comments ignored."""
    out: dict[str, str] = {}
    path = Path(path)
    if not path.exists():
        raise XppgError(f"config file not found: {path}")
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise XppgError(f"{path}: line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        out[key.strip()] = value.strip()
    return out


class Options:
    """Resolve option values with CLI > config > default precedence."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config: dict[str, str] = {}
        if getattr(args, "config", None):
            self.config = parse_kv_file(args.config)

    def get(self, name: str, default=None, cast=str):
        cli_value = getattr(self.args, name, None)
        if cli_value is not None:
            return cli_value
        if name in self.config:
            raw = self.config[name]
            try:
                if cast is bool:
                    return raw.lower() in ("1", "true", "yes", "on")
                return cast(raw)
            except ValueError:
                raise XppgError(f"config key {name!r}: bad value {raw!r}") from None
        return default

    def require(self, name: str, cast=str):
        value = self.get(name, None, cast)
        if value is None:
            raise XppgError(f"missing required option --{name.replace('_', '-')}")
        return value


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read_score_csv(path) -> dict[str, dict[str, float]]:
    """Score CSV -> {method_id: {utterance_id: value}}; empty cells skipped."""
    path = Path(path)
    if not path.exists():
        raise XppgError(f"score file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "utterance_id" or len(header) < 2:
            raise XppgError(f"{path}: expected header 'utterance_id,<method>,...'")
        methods = header[1:]
        out: dict[str, dict[str, float]] = {m: {} for m in methods}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise XppgError(f"{path}: row {lineno}: wrong column count")
            for m, cell in zip(methods, row[1:]):
                if cell.strip():
                    try:
                        out[m][row[0]] = float(cell)
                    except ValueError:
                        raise XppgError(
                            f"{path}: row {lineno}: column {m!r}: bad number {cell!r}"
                        ) from None
    return out


def _acoustic_config(opts: Options) -> acoustics.AcousticConfig:
    return acoustics.AcousticConfig(
        f0_min_hz=opts.get("f0_min", 60.0, float),
        f0_max_hz=opts.get("f0_max", 400.0, float),
        frame_s=opts.get("frame", 0.04, float),
        hop_s=opts.get("hop", 0.01, float),
        voicing_threshold=opts.get("voicing_threshold", 0.45, float),
        cpp_frame_s=opts.get("cpp_frame", 0.20, float),
        cpp_hop_s=opts.get("cpp_hop", 0.02, float),
    )


# ---------------------------------------------------------------- fuse


def _load_fused_inputs(manifest, features_dir, cfg: fusion.MomentConfig, mode: str):
    records = corpus.load_manifest(manifest)
    ids: list[str] = []
    rows: list[np.ndarray] = []
    xvec_dim = ppg_streams = None
    for record in records:
        bundle = corpus.load_feature_bundle(features_dir, record.utterance_id)
        dx = bundle.xvec.shape[1]
        k = bundle.ppg.shape[1]
        if xvec_dim is None:
            xvec_dim, ppg_streams = dx, k
        elif (dx, k) != (xvec_dim, ppg_streams):
            raise XppgError(
                f"utterance {record.utterance_id!r}: feature dims ({dx}, {k}) "
                f"disagree with corpus dims ({xvec_dim}, {ppg_streams})"
            )
        ids.append(record.utterance_id)
        rows.append(fusion.fuse(bundle, cfg, mode))
    return records, ids, np.asarray(rows), xvec_dim, ppg_streams


def cmd_fuse(args) -> int:
    opts = Options(args)
    mode = opts.get("mode", "both")
    cfg = fusion.MomentConfig(opts.get("moments", 1, int))
    out_dir = Path(opts.require("out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    _, ids, matrix, dx, k = _load_fused_inputs(
        opts.require("manifest"), opts.require("features"), cfg, mode
    )
    corpus.write_feature_file(matrix, out_dir / "fused.xpgf")
    (out_dir / "fused.ids").write_text("".join(u + "\n" for u in ids), encoding="utf-8")
    meta = {
        "mode": mode,
        "moments": cfg.max_order,
        "xvec_dim": dx,
        "ppg_streams": k,
        "dim": matrix.shape[1],
        "count": matrix.shape[0],
    }
    (out_dir / "fused.meta").write_text(
        "".join(f"{key} = {value}\n" for key, value in meta.items()), encoding="utf-8"
    )
    return 0


def _load_fused_dir(fused_dir):
    fused_dir = Path(fused_dir)
    matrix = corpus.read_feature_file(fused_dir / "fused.xpgf")
    ids_path = fused_dir / "fused.ids"
    if not ids_path.exists():
        raise XppgError(f"missing id index: {ids_path}")
    ids = [line for line in ids_path.read_text(encoding="utf-8").splitlines() if line]
    if len(ids) != matrix.shape[0]:
        raise XppgError(
            f"{fused_dir}: {len(ids)} ids but {matrix.shape[0]} fused rows"
        )
    meta = parse_kv_file(fused_dir / "fused.meta")
    return ids, matrix, meta


# ----------------------------------------------------------- fit / score


def cmd_fit(args) -> int:
    opts = Options(args)
    ids, matrix, meta = _load_fused_dir(opts.require("fused"))
    centering = opts.get("centering", "on")
    if centering not in ("on", "off"):
        raise XppgError(f"--centering must be 'on' or 'off', got {centering!r}")
    model = pca.fit_pca(
        matrix,
        rank=opts.get("rank", None, int),
        center=centering == "on",
        meta=pca.ModelMeta(
            mode=meta.get("mode", "both"),
            moment_order=int(meta.get("moments", 0)),
            xvec_dim=int(meta.get("xvec_dim", 0)),
            ppg_streams=int(meta.get("ppg_streams", 0)),
        ),
    )
    pca.save_model(model, opts.require("out"))
    return 0


def cmd_score(args) -> int:
    opts = Options(args)
    model = pca.load_model(opts.require("model"))
    ids, matrix, meta = _load_fused_dir(opts.require("fused"))
    if meta.get("mode") and meta["mode"] != model.meta.mode:
        raise XppgError(
            f"fused vectors built with mode {meta['mode']!r}, "
            f"model expects {model.meta.mode!r}"
        )
    if int(meta.get("moments", model.meta.moment_order) or 0) != model.meta.moment_order:
        raise XppgError(
            f"fused vectors built with moment order {meta.get('moments')}, "
            f"model expects {model.meta.moment_order}"
        )
    projections = pca.transform(model, matrix)[:, 0]
    method_id = opts.get("method_id", "xppg-pca")
    _write_csv(
        opts.require("out"),
        ["utterance_id", method_id],
        [[u, _fmt(s, _SCORE_FMT)] for u, s in zip(ids, projections)],
    )
    return 0


# ------------------------------------------------------------- baseline


def cmd_baseline(args) -> int:
    opts = Options(args)
    records = corpus.load_manifest(opts.require("manifest"))
    cfg = _acoustic_config(opts)
    names = [n.strip() for n in opts.get("features", ",".join(evaluation.BASELINE_NAMES)).split(",") if n.strip()]
    threads = opts.get("threads", 1, int)

    def one(record):
        audio = corpus.read_wav(record.wav_path)
        return evaluation.compute_baseline_features(record, audio, names, cfg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, records))
    else:
        results = [one(r) for r in records]
    rows = []
    for record, values in zip(records, results):
        row = [record.utterance_id]
        for name in names:
            v = values[name]
            row.append("" if math.isnan(v) else _fmt(v, _SCORE_FMT))
        rows.append(row)
    _write_csv(opts.require("out"), ["utterance_id", *names], rows)
    return 0


# ------------------------------------------------------------ refmetric


def cmd_refmetric(args) -> int:
    opts = Options(args)
    records = corpus.load_manifest(opts.require("manifest"))
    hyps = refmetrics.load_phoneme_file(opts.require("hyp"))
    consonants = skt = None
    if opts.get("consonants"):
        consonants = refmetrics.load_symbol_set(opts.get("consonants"))
    if opts.get("skt"):
        skt = refmetrics.load_symbol_set(opts.get("skt"))
    header = ["utterance_id", "per"]
    if consonants is not None:
        header.append("consonant_er")
    if skt is not None:
        header.append("skt_er")
    rows = []
    scored = 0
    for record in records:
        if not record.phoneme_ref:
            continue
        scored += 1
        if record.utterance_id not in hyps:
            raise XppgError(
                f"no hypothesis sequence for utterance {record.utterance_id!r}"
            )
        hyp = hyps[record.utterance_id]
        row = [record.utterance_id, _fmt(refmetrics.per(record.phoneme_ref, hyp), _SCORE_FMT)]
        for subset in (consonants, skt):
            if subset is not None:
                try:
                    rate = refmetrics.subset_error_rate(record.phoneme_ref, hyp, subset)
                    row.append(_fmt(rate, _SCORE_FMT))
                except XppgError:
                    row.append("")
        rows.append(row)
    if scored == 0:
        raise XppgError("no manifest utterance carries a phoneme reference")
    _write_csv(opts.require("out"), header, rows)
    return 0


# ------------------------------------------------------------ noise-mix


def cmd_noise_mix(args) -> int:
    opts = Options(args)
    records = corpus.load_manifest(opts.require("manifest"))
    snr_db = opts.require("snr", float)
    seed = opts.require("seed", int)
    noise_dir = opts.get("noise_dir")
    synthetic = opts.get("synthetic")
    if (noise_dir is None) == (synthetic is None):
        raise XppgError("exactly one of --noise-dir or --synthetic is required")
    noise_files: list[Path] = []
    if noise_dir is not None:
        noise_files = sorted(Path(noise_dir).glob("*.wav"))
        if not noise_files:
            raise XppgError(f"no .wav files under noise dir {noise_dir}")
    out_dir = Path(opts.require("out"))
    wav_out = out_dir / "wav"
    wav_out.mkdir(parents=True, exist_ok=True)

    mixed_records = []
    meta_rows = []
    for i, record in enumerate(records):
        audio = corpus.read_wav(record.wav_path)
        utt_seed = int(np.random.SeedSequence(seed, spawn_key=(i,)).generate_state(1)[0])
        if synthetic is not None:
            nbuf = noise.synthetic_noise(
                synthetic, audio.samples.size, audio.sample_rate_hz, utt_seed
            )
        else:
            pick = noise_files[
                int(noise.rng_from_seed(utt_seed, 1).integers(0, len(noise_files)))
            ]
            nbuf = corpus.read_wav(pick)
        result = noise.mix_at_snr(audio, nbuf, noise.MixSpec(snr_db=snr_db, seed=utt_seed))
        corpus.write_wav(result.mixed, wav_out / f"{record.utterance_id}.wav", encoding="float32")
        mixed_records.append(
            corpus.UtteranceRecord(
                utterance_id=record.utterance_id,
                speaker_id=record.speaker_id,
                timepoint_id=record.timepoint_id,
                wav_path=Path("wav") / f"{record.utterance_id}.wav",
                transcript=record.transcript,
                phoneme_ref=record.phoneme_ref,
                rating=record.rating,
            )
        )
        meta_rows.append(
            [
                record.utterance_id,
                _fmt(snr_db),
                _fmt(result.realized_snr_db),
                _fmt(result.noise_gain, _SCORE_FMT),
                _fmt(result.norm_gain, _SCORE_FMT),
            ]
        )
    corpus.write_manifest(mixed_records, out_dir / "manifest.csv")
    _write_csv(
        out_dir / "mix_meta.csv",
        ["utterance_id", "target_snr_db", "realized_snr_db", "noise_gain", "norm_gain"],
        meta_rows,
    )
    return 0


# ------------------------------------------------------------- evaluate


def cmd_evaluate(args) -> int:
    opts = Options(args)
    records = corpus.load_manifest(opts.require("manifest"))
    score_files = getattr(args, "scores", None) or []
    if not score_files:
        raise XppgError("at least one --scores file is required")
    merged: dict[str, dict[str, float]] = {}
    for path in score_files:
        for method_id, scores in _read_score_csv(path).items():
            if method_id in merged:
                raise XppgError(f"method {method_id!r} appears in two score files")
            merged[method_id] = scores
    ratings = evaluation.ratings_by_group(records)
    out_dir = Path(opts.require("out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for method_id in sorted(merged):
        scores = {u: v for u, v in merged[method_id].items() if not math.isnan(v)}
        try:
            agg = evaluation.aggregate(scores, records)
            n, r, p = evaluation.correlate_with_ratings(agg, ratings)
        except XppgError as exc:
            raise XppgError(f"method {method_id!r}: {exc}") from None
        rows.append([method_id, n, _fmt(r), _fmt(p), evaluation.significance_stars(p)])
    _write_csv(out_dir / "correlations.csv", ["method", "n", "r", "p", "significance"], rows)
    width = max(len(r[0]) for r in rows)
    lines = [f"{'method'.ljust(width)}  {'n':>4}  {'r':>10}  significance"]
    for method_id, n, r, _p, stars in rows:
        lines.append(f"{method_id.ljust(width)}  {n:>4}  {float(r):>10.4f}  {stars}")
    lines.append("")
    lines.append("Significance levels are 0.05 (*), 0.01 (**), and 0.001 (***); n.s. otherwise.")
    (out_dir / "summary.txt").write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return 0


# ------------------------------------------------------------ subsample


def cmd_subsample(args) -> int:
    opts = Options(args)
    records = corpus.load_manifest(opts.require("manifest"))
    seed = opts.require("seed", int)
    tables = _read_score_csv(opts.require("scores"))
    column = opts.get("column")
    if column is None:
        if len(tables) != 1:
            raise XppgError(
                f"score file has columns {sorted(tables)}; pick one with --column"
            )
        column = next(iter(tables))
    elif column not in tables:
        raise XppgError(f"score file has no column {column!r}")
    n_grid = [int(v) for v in opts.require("n_grid").split(",") if v.strip()]
    rows = evaluation.run_subsample_curve(
        tables[column], records, n_grid, opts.get("repeats", 5, int), seed
    )
    _write_csv(
        opts.require("out"),
        ["n_utterances", "mean_r", "ci_low", "ci_high"],
        [[row.n_utterances, _fmt(row.mean_r), _fmt(row.ci_low), _fmt(row.ci_high)] for row in rows],
    )
    return 0


# ---------------------------------------------------------- cross-matrix


def _parse_corpus_spec(spec: str) -> tuple[str, Path, Path]:
    if "=" not in spec:
        raise XppgError(f"corpus spec {spec!r} must look like name=manifest:features_dir")
    name, _, rest = spec.partition("=")
    manifest, sep, feat = rest.partition(":")
    if not sep:
        raise XppgError(f"corpus spec {spec!r} must look like name=manifest:features_dir")
    return name, Path(manifest), Path(feat)


def cmd_cross_matrix(args) -> int:
    opts = Options(args)
    mode = opts.get("mode", "both")
    cfg = fusion.MomentConfig(opts.get("moments", 1, int))
    centering = opts.get("centering", "on")

    def build(spec: str) -> evaluation.FusedCorpus:
        name, manifest, feat_dir = _parse_corpus_spec(spec)
        try:
            records, ids, matrix, _, _ = _load_fused_inputs(manifest, feat_dir, cfg, mode)
        except XppgError as exc:
            raise XppgError(f"corpus {name!r}: {exc}") from None
        return evaluation.FusedCorpus(
            name=name, ids=tuple(ids), matrix=matrix, records=tuple(records)
        )

    train = [build(s) for s in (getattr(args, "train", None) or [])]
    test = [build(s) for s in (getattr(args, "test", None) or [])]
    results = evaluation.run_cross_matrix(
        train, test, rank=opts.get("rank", None, int), center=centering == "on"
    )
    out_dir = Path(opts.require("out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [
        [tr, te, results[(tr, te)][0], _fmt(results[(tr, te)][1]), _fmt(results[(tr, te)][2])]
        for tr, te in sorted(results)
    ]
    _write_csv(out_dir / "cross_matrix.csv", ["train", "test", "n", "r", "p"], rows)
    return 0


# ---------------------------------------------------------- synth-corpus


def cmd_synth_corpus(args) -> int:
    opts = Options(args)
    cfg = synth.SynthConfig(
        n_speakers=opts.get("speakers", 20, int),
        n_utterances=opts.get("utterances", 40, int),
        xvec_dim=opts.get("xvec_dim", 16, int),
        ppg_streams=opts.get("ppg_streams", 6, int),
        ppg_frames=opts.get("ppg_frames", 60, int),
        sample_rate_hz=opts.get("sample_rate", 16000, int),
        duration_s=opts.get("duration", 0.6, float),
    )
    synth.generate_corpus(opts.require("out"), opts.require("seed", int), cfg)
    return 0


# ----------------------------------------------------------------- main


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key = value config file")
    sub.add_argument("--threads", type=int, help="worker cap for per-utterance parallelism")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xppg",
        description="Reference-free speech severity scoring and its evaluation harness.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("synth-corpus", help="generate the hermetic synthetic corpus")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--speakers", type=int)
    sp.add_argument("--utterances", type=int)
    sp.add_argument("--xvec-dim", dest="xvec_dim", type=int)
    sp.add_argument("--ppg-streams", dest="ppg_streams", type=int)
    sp.add_argument("--ppg-frames", dest="ppg_frames", type=int)
    sp.add_argument("--sample-rate", dest="sample_rate", type=int)
    sp.add_argument("--duration", type=float)
    _add_common(sp)
    sp.set_defaults(func=cmd_synth_corpus)

    sp = subs.add_parser("fuse", help="reduce feature files to fused vectors")
    sp.add_argument("--manifest")
    sp.add_argument("--features")
    sp.add_argument("--out")
    sp.add_argument("--mode", choices=fusion.MODES)
    sp.add_argument("--moments", type=int)
    _add_common(sp)
    sp.set_defaults(func=cmd_fuse)

    sp = subs.add_parser("fit", help="fit the PCA severity model on fused vectors")
    sp.add_argument("--fused")
    sp.add_argument("--out")
    sp.add_argument("--rank", type=int)
    sp.add_argument("--centering", choices=("on", "off"))
    _add_common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = subs.add_parser("score", help="project fused vectors through a fitted model")
    sp.add_argument("--model")
    sp.add_argument("--fused")
    sp.add_argument("--out")
    sp.add_argument("--method-id", dest="method_id")
    _add_common(sp)
    sp.set_defaults(func=cmd_score)

    sp = subs.add_parser("baseline", help="acoustic baseline features per utterance")
    sp.add_argument("--manifest")
    sp.add_argument("--out")
    sp.add_argument("--features", help="comma-separated feature names")
    sp.add_argument("--f0-min", dest="f0_min", type=float)
    sp.add_argument("--f0-max", dest="f0_max", type=float)
    sp.add_argument("--frame", type=float)
    sp.add_argument("--hop", type=float)
    sp.add_argument("--voicing-threshold", dest="voicing_threshold", type=float)
    sp.add_argument("--cpp-frame", dest="cpp_frame", type=float)
    sp.add_argument("--cpp-hop", dest="cpp_hop", type=float)
    _add_common(sp)
    sp.set_defaults(func=cmd_baseline)

    sp = subs.add_parser("refmetric", help="phoneme error rates against references")
    sp.add_argument("--manifest")
    sp.add_argument("--hyp")
    sp.add_argument("--out")
    sp.add_argument("--consonants", help="consonant symbol set file")
    sp.add_argument("--skt", help="/s k t/ symbol set file")
    _add_common(sp)
    sp.set_defaults(func=cmd_refmetric)

    sp = subs.add_parser("noise-mix", help="mix noise into a corpus at a target SNR")
    sp.add_argument("--manifest")
    sp.add_argument("--out")
    sp.add_argument("--snr", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--noise-dir", dest="noise_dir")
    sp.add_argument("--synthetic", choices=noise.SYNTHETIC_KINDS)
    _add_common(sp)
    sp.set_defaults(func=cmd_noise_mix)

    sp = subs.add_parser("evaluate", help="correlate method scores with ratings")
    sp.add_argument("--manifest")
    sp.add_argument("--scores", action="append")
    sp.add_argument("--out")
    _add_common(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = subs.add_parser("subsample", help="correlation vs utterances-per-speaker curve")
    sp.add_argument("--manifest")
    sp.add_argument("--scores")
    sp.add_argument("--column")
    sp.add_argument("--n-grid", dest="n_grid")
    sp.add_argument("--repeats", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    _add_common(sp)
    sp.set_defaults(func=cmd_subsample)

    sp = subs.add_parser("cross-matrix", help="train/test correlation matrix across corpora")
    sp.add_argument("--train", action="append", metavar="NAME=MANIFEST:FEATURES")
    sp.add_argument("--test", action="append", metavar="NAME=MANIFEST:FEATURES")
    sp.add_argument("--mode", choices=fusion.MODES)
    sp.add_argument("--moments", type=int)
    sp.add_argument("--rank", type=int)
    sp.add_argument("--centering", choices=("on", "off"))
    sp.add_argument("--out")
    _add_common(sp)
    sp.set_defaults(func=cmd_cross_matrix)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except XppgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
