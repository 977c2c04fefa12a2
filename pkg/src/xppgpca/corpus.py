"""Corpus data model: manifests, WAV audio, and XPGF feature files.

The XPGF container is the on-disk contract shared with external feature
extractors: little-endian, magic ``XPGF``, u32 version (1), u32 rows,
u32 cols, then rows*cols IEEE-754 float32 values row-major.  No padding,
no trailing bytes.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from xppgpca.errors import AudioError, FeatureFileError, ManifestError

MANIFEST_HEADER = [
    "utterance_id",
    "speaker_id",
    "timepoint_id",
    "wav_path",
    "transcript",
    "phoneme_ref",
    "rating",
]

_XPGF_MAGIC = b"XPGF"
_XPGF_HEADER = struct.Struct("<4sIII")


@dataclass(frozen=True)
class UtteranceRecord:
    """One manifest row: an utterance with metadata and optional rating."""

    utterance_id: str
    speaker_id: str
    timepoint_id: str
    wav_path: Path
    transcript: str = ""
    phoneme_ref: tuple[str, ...] = ()
    rating: float | None = None


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio: float samples in [-1, 1] at a fixed sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise AudioError("audio buffer must be a non-empty 1-D signal")
        if not np.all(np.isfinite(samples)):
            raise AudioError("audio buffer contains non-finite samples")
        if np.max(np.abs(samples)) > 1.0 + 1e-9:
            raise AudioError("audio samples exceed [-1, 1]")
        if self.sample_rate_hz < 8000:
            raise AudioError(f"sample rate {self.sample_rate_hz} below 8 kHz")
        object.__setattr__(self, "samples", samples)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class FeatureBundle:
    """Per-utterance raw features: a 1xD x-vector and a TxK posteriorgram."""

    xvec: np.ndarray
    ppg: np.ndarray

    def __post_init__(self):
        xvec = _as_feature_matrix(self.xvec, "xvec")
        ppg = _as_feature_matrix(self.ppg, "ppg")
        if xvec.shape[0] != 1:
            raise FeatureFileError(f"x-vector must be 1xD, got {xvec.shape}")
        if np.min(ppg) < 0.0 or np.max(ppg) > 1.0:
            raise FeatureFileError("PPG entries must lie in [0, 1]")
        object.__setattr__(self, "xvec", xvec)
        object.__setattr__(self, "ppg", ppg)


def _as_feature_matrix(values, name: str = "matrix") -> np.ndarray:
    """Validate and coerce to a 2-D float32 feature matrix."""
    arr = np.asarray(values, dtype=np.float32)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise FeatureFileError(f"{name} must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(arr)):
        raise FeatureFileError(f"{name} contains non-finite values")
    return arr


def load_manifest(path) -> list[UtteranceRecord]:
    """Read a manifest CSV into records, preserving row order.

    The manifest must carry the exact header
    ``utterance_id,speaker_id,timepoint_id,wav_path,transcript,phoneme_ref,rating``.
    ``phoneme_ref`` is space-separated symbols; an empty ``rating`` cell means
    the rating is absent.  Relative ``wav_path`` entries are resolved against
    the manifest's directory, and every referenced file must exist.
    """
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    base = path.parent
    records: list[UtteranceRecord] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestError(f"{path}: empty manifest") from None
        if header != MANIFEST_HEADER:
            raise ManifestError(
                f"{path}: row 1: bad header {header!r}, "
                f"expected {MANIFEST_HEADER!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(MANIFEST_HEADER):
                raise ManifestError(
                    f"{path}: row {lineno}: expected "
                    f"{len(MANIFEST_HEADER)} columns, got {len(row)}"
                )
            utt, spk, tp, wav, transcript, phon, rating_s = row
            if not utt:
                raise ManifestError(f"{path}: row {lineno}: column 'utterance_id' is empty")
            if utt in seen:
                raise ManifestError(f"{path}: duplicate utterance_id {utt!r}")
            seen.add(utt)
            rating = None
            if rating_s.strip():
                try:
                    rating = float(rating_s)
                except ValueError:
                    raise ManifestError(
                        f"{path}: row {lineno}: column 'rating': "
                        f"not a number: {rating_s!r}"
                    ) from None
                if not np.isfinite(rating):
                    raise ManifestError(
                        f"{path}: row {lineno}: column 'rating': non-finite value"
                    )
            wav_path = Path(wav)
            if not wav_path.is_absolute():
                wav_path = base / wav_path
            if not wav_path.exists():
                raise ManifestError(
                    f"missing wav file for utterance {utt!r}: {wav_path}"
                )
            records.append(
                UtteranceRecord(
                    utterance_id=utt,
                    speaker_id=spk,
                    timepoint_id=tp,
                    wav_path=wav_path,
                    transcript=transcript,
                    phoneme_ref=tuple(phon.split()),
                    rating=rating,
                )
            )
    return records


def write_manifest(records, path) -> None:
    """Write records back out in the manifest CSV format."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.utterance_id,
                    r.speaker_id,
                    r.timepoint_id,
                    str(r.wav_path),
                    r.transcript,
                    " ".join(r.phoneme_ref),
                    "" if r.rating is None else format(r.rating, ".10g"),
                ]
            )


def read_wav(path) -> AudioBuffer:
    """Read a PCM WAV file (16-bit int or 32-bit float, any channel count).

    Multichannel input is mean-downmixed to mono; 16-bit samples are scaled
    to [-1, 1] by 1/32768.
    """
    path = Path(path)
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise AudioError(f"wav file not found: {path}") from None
    except (ValueError, EOFError, struct.error) as exc:
        raise AudioError(f"{path}: unreadable or truncated wav: {exc}") from None
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise AudioError(
            f"{path}: unsupported encoding {data.dtype}; "
            "expected 16-bit PCM or 32-bit float"
        )
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if samples.size == 0:
        raise AudioError(f"{path}: wav contains no samples")
    try:
        return AudioBuffer(samples=samples, sample_rate_hz=int(rate))
    except AudioError as exc:
        raise AudioError(f"{path}: {exc}") from None


def write_wav(buffer: AudioBuffer, path, encoding: str = "int16") -> None:
    """Write mono audio as PCM WAV (``int16`` or ``float32``)."""
    path = Path(path)
    if encoding == "int16":
        clipped = np.clip(buffer.samples, -1.0, 32767.0 / 32768.0)
        data = np.round(clipped * 32768.0).astype(np.int16)
    elif encoding == "float32":
        data = buffer.samples.astype(np.float32)
    else:
        raise AudioError(f"unsupported wav encoding: {encoding!r}")
    wavfile.write(path, buffer.sample_rate_hz, data)


def write_feature_file(matrix, path) -> None:
    """Serialize a feature matrix to the XPGF v1 (float32) container."""
    arr = _as_feature_matrix(matrix)
    path = Path(path)
    rows, cols = arr.shape
    with open(path, "wb") as fh:
        fh.write(_XPGF_HEADER.pack(_XPGF_MAGIC, 1, rows, cols))
        fh.write(arr.astype("<f4").tobytes(order="C"))


def read_feature_file(path) -> np.ndarray:
    """Read an XPGF v1 file back into a float32 matrix, bit-exactly."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise FeatureFileError(f"feature file not found: {path}") from None
    if len(raw) < _XPGF_HEADER.size:
        raise FeatureFileError(f"{path}: truncated header")
    magic, version, rows, cols = _XPGF_HEADER.unpack_from(raw, 0)
    if magic != _XPGF_MAGIC:
        raise FeatureFileError(f"{path}: bad magic {magic!r}")
    if version != 1:
        raise FeatureFileError(f"{path}: unsupported format version {version}")
    if rows < 1 or cols < 1:
        raise FeatureFileError(f"{path}: empty matrix ({rows}x{cols})")
    payload = raw[_XPGF_HEADER.size:]
    expected = 4 * rows * cols
    if len(payload) != expected:
        raise FeatureFileError(
            f"{path}: payload holds {len(payload) // 4} floats, "
            f"header promises {rows * cols}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(rows, cols).astype(np.float32)
    if not np.all(np.isfinite(arr)):
        raise FeatureFileError(f"{path}: non-finite values in payload")
    return arr


def load_feature_bundle(features_dir, utterance_id: str) -> FeatureBundle:
    """Load ``<utt>.xvec.xpgf`` and ``<utt>.ppg.xpgf`` from a directory."""
    features_dir = Path(features_dir)
    xvec_path = features_dir / f"{utterance_id}.xvec.xpgf"
    ppg_path = features_dir / f"{utterance_id}.ppg.xpgf"
    for p in (xvec_path, ppg_path):
        if not p.exists():
            raise FeatureFileError(
                f"missing feature file for utterance {utterance_id!r}: {p}"
            )
    return FeatureBundle(xvec=read_feature_file(xvec_path), ppg=read_feature_file(ppg_path))
