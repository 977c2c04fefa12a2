"""Unsupervised PCA over fused vectors and severity scoring.

The corpus matrix is mean-centered (optional) and decomposed by SVD; the
right singular vectors are the principal directions.  An utterance's
severity score is the projection of its (centered) fused vector onto the
first component.  No labels enter the fit.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from xppgpca.errors import ModelFileError, XppgError
from xppgpca.fusion import MODES

_MODEL_MAGIC = b"XPGPCA01"
_MODEL_HEADER = struct.Struct("<6I")
_BLOCK_HEADER = struct.Struct("<4sIII")
_BLOCK_MAGIC = b"XPGF"
_BLOCK_VERSION = 2  # float64 payload; feature files on disk use v1/float32


@dataclass(frozen=True)
class ModelMeta:
    """Provenance of a fitted model: how its input vectors were built."""

    mode: str = "both"
    moment_order: int = 0
    xvec_dim: int = 0
    ppg_streams: int = 0


@dataclass(frozen=True)
class PcaModel:
    """Mean vector plus orthonormal principal directions (rows)."""

    mean: np.ndarray
    components: np.ndarray
    singular_values: np.ndarray
    meta: ModelMeta = field(default_factory=ModelMeta)

    @property
    def dim(self) -> int:
        return self.components.shape[1]

    @property
    def rank(self) -> int:
        return self.components.shape[0]


def fit_pca(vectors, rank: int | None = None, center: bool = True,
            meta: ModelMeta | None = None) -> PcaModel:
    """Fit principal directions to an NxD matrix of fused vectors.

    The decomposition runs on the mean-centered matrix by default
    (``center=False`` keeps the raw matrix, with a zero mean vector stored
    so scoring is uniform).  Component signs follow a fixed convention:
    a row is negated when its largest-magnitude entry is negative, ties
    resolved toward the lowest index, so refits are bit-identical.
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2:
        raise XppgError("expected an NxD matrix of fused vectors")
    n, d = x.shape
    if n < 2:
        raise XppgError(f"need at least 2 vectors to fit, got {n}")
    if d < 1:
        raise XppgError("vectors must have at least one dimension")
    if not np.all(np.isfinite(x)):
        raise XppgError("input matrix contains non-finite values")
    max_rank = min(n, d)
    if rank is None:
        rank = max_rank
    if not 1 <= rank <= max_rank:
        raise XppgError(f"rank must be in 1..{max_rank}, got {rank}")
    mean = x.mean(axis=0) if center else np.zeros(d)
    _, s, vt = np.linalg.svd(x - mean, full_matrices=False)
    components = vt[:rank].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PcaModel(
        mean=mean,
        components=components,
        singular_values=s[:rank].copy(),
        meta=meta or ModelMeta(),
    )


def score(model: PcaModel, v) -> float:
    """Severity score: projection of ``v - mean`` onto the first component."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape[0] != model.dim:
        raise XppgError(
            f"vector has dimension {v.shape[0]}, model expects {model.dim}"
        )
    return float((v - model.mean) @ model.components[0])


def transform(model: PcaModel, vectors) -> np.ndarray:
    """Project rows of an NxD matrix onto all retained components."""
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.dim:
        raise XppgError(f"expected an Nx{model.dim} matrix")
    return (x - model.mean) @ model.components.T


_MODE_CODES = {m: i for i, m in enumerate(MODES)}


def _write_block(fh, arr: np.ndarray) -> None:
    rows, cols = arr.shape
    fh.write(_BLOCK_HEADER.pack(_BLOCK_MAGIC, _BLOCK_VERSION, rows, cols))
    fh.write(arr.astype("<f8").tobytes(order="C"))


def _read_block(raw: bytes, offset: int, what: str) -> tuple[np.ndarray, int]:
    if len(raw) < offset + _BLOCK_HEADER.size:
        raise ModelFileError(f"truncated {what} block header")
    magic, version, rows, cols = _BLOCK_HEADER.unpack_from(raw, offset)
    if magic != _BLOCK_MAGIC:
        raise ModelFileError(f"bad magic in {what} block: {magic!r}")
    if version != _BLOCK_VERSION:
        raise ModelFileError(
            f"{what} block version {version}, expected {_BLOCK_VERSION}"
        )
    offset += _BLOCK_HEADER.size
    nbytes = 8 * rows * cols
    if len(raw) < offset + nbytes:
        raise ModelFileError(f"truncated {what} block payload")
    arr = np.frombuffer(raw, dtype="<f8", count=rows * cols, offset=offset)
    return arr.reshape(rows, cols).astype(np.float64), offset + nbytes


def save_model(model: PcaModel, path) -> None:
    """Serialize a model; reloading reproduces scores bit-exactly."""
    meta = model.meta
    if meta.mode not in _MODE_CODES:
        raise ModelFileError(f"cannot serialize unknown mode {meta.mode!r}")
    with open(path, "wb") as fh:
        fh.write(_MODEL_MAGIC)
        fh.write(
            _MODEL_HEADER.pack(
                model.dim,
                model.rank,
                _MODE_CODES[meta.mode],
                meta.moment_order,
                meta.xvec_dim,
                meta.ppg_streams,
            )
        )
        _write_block(fh, model.mean.reshape(1, -1))
        _write_block(fh, model.singular_values.reshape(1, -1))
        _write_block(fh, model.components)


def load_model(path) -> PcaModel:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except FileNotFoundError:
        raise ModelFileError(f"model file not found: {path}") from None
    if raw[: len(_MODEL_MAGIC)] != _MODEL_MAGIC:
        raise ModelFileError(f"{path}: not a PCA model file (bad magic)")
    offset = len(_MODEL_MAGIC)
    if len(raw) < offset + _MODEL_HEADER.size:
        raise ModelFileError(f"{path}: truncated header")
    dim, rank, mode_code, m_order, dx, k = _MODEL_HEADER.unpack_from(raw, offset)
    offset += _MODEL_HEADER.size
    if mode_code >= len(MODES):
        raise ModelFileError(f"{path}: unknown mode code {mode_code}")
    mean, offset = _read_block(raw, offset, "mean")
    svals, offset = _read_block(raw, offset, "singular-value")
    components, offset = _read_block(raw, offset, "component")
    if offset != len(raw):
        raise ModelFileError(f"{path}: {len(raw) - offset} trailing bytes")
    if mean.shape != (1, dim) or svals.shape != (1, rank) \
            or components.shape != (rank, dim):
        raise ModelFileError(f"{path}: block shapes disagree with header")
    return PcaModel(
        mean=mean.reshape(-1),
        components=components,
        singular_values=svals.reshape(-1),
        meta=ModelMeta(
            mode=MODES[mode_code],
            moment_order=m_order,
            xvec_dim=dx,
            ppg_streams=k,
        ),
    )
