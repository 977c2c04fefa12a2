"""Reference-based baselines: phoneme alignment and error rates.

Predicted phoneme sequences are aligned to reference sequences with a
minimal-cost edit alignment (unit costs).  The phoneme error rate is
(substitutions + insertions + deletions) / reference length; subset error
rates (consonants, /s k t/) count only error events tied to a subset
symbol, over the subset's count in the reference.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from xppgpca.errors import XppgError

MATCH = "match"
SUBSTITUTE = "substitute"
DELETE = "delete"
INSERT = "insert"


@dataclass(frozen=True)
class AlignOp:
    """One alignment step; indices are None where a side is not consumed."""

    kind: str
    ref_index: int | None
    hyp_index: int | None


def align(ref, hyp) -> list[AlignOp]:
    """Minimal-cost edit alignment of two symbol sequences.

    Backtrace ties resolve deterministically in the order
    match > substitute > delete > insert.
    """
    ref = list(ref)
    hyp = list(hyp)
    if not ref:
        raise XppgError("reference sequence must be non-empty")
    n, m = len(ref), len(hyp)
    cost = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        cost[i][0] = i
    for j in range(1, m + 1):
        cost[0][j] = j
    for i in range(1, n + 1):
        ci = cost[i]
        cp = cost[i - 1]
        ri = ref[i - 1]
        for j in range(1, m + 1):
            diag = cp[j - 1] + (ri != hyp[j - 1])
            up = cp[j] + 1
            left = ci[j - 1] + 1
            ci[j] = diag if diag <= up and diag <= left else min(up, left)
    ops: list[AlignOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] \
                and cost[i][j] == cost[i - 1][j - 1]:
            ops.append(AlignOp(MATCH, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and cost[i][j] == cost[i - 1][j - 1] + 1:
            ops.append(AlignOp(SUBSTITUTE, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and cost[i][j] == cost[i - 1][j] + 1:
            ops.append(AlignOp(DELETE, i - 1, None))
            i -= 1
        else:
            ops.append(AlignOp(INSERT, None, j - 1))
            j -= 1
    ops.reverse()
    return ops


def alignment_cost(ops) -> int:
    return sum(op.kind != MATCH for op in ops)


def per(ref, hyp) -> float:
    """Phoneme error rate: (S + I + D) / |ref|.  May exceed 1."""
    ref = list(ref)
    ops = align(ref, hyp)
    return alignment_cost(ops) / len(ref)


def subset_error_rate(ref, hyp, subset) -> float:
    """Error rate restricted to a symbol subset.

    The alignment runs over the full sequences; substitutions and deletions
    count when the reference symbol is in the subset, insertions when the
    inserted hypothesis symbol is.  The denominator is the subset symbol
    count in the reference.
    """
    ref = list(ref)
    hyp = list(hyp)
    subset = frozenset(subset)
    denom = sum(s in subset for s in ref)
    if denom == 0:
        raise XppgError("reference contains no symbols from the subset")
    errors = 0
    for op in align(ref, hyp):
        if op.kind in (SUBSTITUTE, DELETE):
            errors += ref[op.ref_index] in subset
        elif op.kind == INSERT:
            errors += hyp[op.hyp_index] in subset
    return errors / denom


def load_phoneme_file(path) -> dict[str, tuple[str, ...]]:
    """Read ``utterance_id<TAB>space-separated symbols`` lines (UTF-8)."""
    path = Path(path)
    if not path.exists():
        raise XppgError(f"phoneme sequence file not found: {path}")
    out: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise XppgError(f"{path}: line {lineno}: missing tab separator")
            utt, symbols = line.split("\t", 1)
            if utt in out:
                raise XppgError(f"{path}: duplicate utterance_id {utt!r}")
            out[utt] = tuple(symbols.split())
    return out


def write_phoneme_file(sequences: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for utt, symbols in sequences.items():
            fh.write(f"{utt}\t{' '.join(symbols)}\n")


def load_symbol_set(path) -> frozenset[str]:
    """Read a subset file: one symbol per line, blanks ignored."""
    path = Path(path)
    if not path.exists():
        raise XppgError(f"symbol set file not found: {path}")
    symbols = {line.strip() for line in path.read_text(encoding="utf-8").splitlines()}
    symbols.discard("")
    if not symbols:
        raise XppgError(f"{path}: symbol set file is empty")
    return frozenset(symbols)
