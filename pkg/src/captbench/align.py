"""Minimum-edit-distance alignment over token sequences, with traceback.

Unit costs for insert/delete/substitute. Among minimal-cost scripts the
aligner maximizes matches, which makes the (I, D, S, matches) counts a
pure function of the sequence pair: they cannot depend on tie-breaking,
and swapping the arguments exactly swaps I with D. Remaining traceback
ties are broken in the fixed order match > substitute > delete > insert
so the op list itself (and any per-position flags read off it) is also
identical across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import EmptyReference

MATCH = "match"
SUBSTITUTE = "substitute"
DELETE = "delete"
INSERT = "insert"

_PUNCT_STRIP = '.,!?;:"'


@dataclass(frozen=True)
class EditOp:
    kind: str
    ref_index: Optional[int]
    hyp_index: Optional[int]


@dataclass(frozen=True)
class Alignment:
    ops: tuple[EditOp, ...]
    insertions: int
    deletions: int
    substitutions: int
    matches: int
    ref_len: int
    hyp_len: int

    @property
    def distance(self) -> int:
        return self.insertions + self.deletions + self.substitutions

    def to_dict(self) -> dict:
        return {
            "schema": "capt-align/1",
            "ops": [[op.kind, op.ref_index, op.hyp_index] for op in self.ops],
            "counts": {
                "I": self.insertions,
                "D": self.deletions,
                "S": self.substitutions,
                "matches": self.matches,
                "N": self.ref_len,
            },
        }


def align(ref: Sequence, hyp: Sequence) -> Alignment:
    """Minimal unit-cost edit script turning ref into hyp.

    Each DP cell holds cost * K - matches (with matches < K), so a single
    integer minimization is lexicographic: cost first, then max matches.
    """
    m, n = len(ref), len(hyp)
    big = min(m, n) + 2
    dist = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        dist[i][0] = i * big
    dist[0] = [j * big for j in range(n + 1)]
    for i in range(1, m + 1):
        row = dist[i]
        prev = dist[i - 1]
        ref_tok = ref[i - 1]
        for j in range(1, n + 1):
            diagonal = prev[j - 1] + (big if ref_tok != hyp[j - 1] else -1)
            row[j] = min(diagonal, prev[j] + big, row[j - 1] + big)

    ops: list[EditOp] = []
    i, j = m, n
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and dist[i - 1][j - 1] - 1 == here:
            ops.append(EditOp(MATCH, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and ref[i - 1] != hyp[j - 1] and dist[i - 1][j - 1] + big == here:
            ops.append(EditOp(SUBSTITUTE, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i - 1][j] + big == here:
            ops.append(EditOp(DELETE, i - 1, None))
            i -= 1
        else:
            ops.append(EditOp(INSERT, None, j - 1))
            j -= 1
    ops.reverse()

    counts = {MATCH: 0, SUBSTITUTE: 0, DELETE: 0, INSERT: 0}
    for op in ops:
        counts[op.kind] += 1
    return Alignment(
        ops=tuple(ops),
        insertions=counts[INSERT],
        deletions=counts[DELETE],
        substitutions=counts[SUBSTITUTE],
        matches=counts[MATCH],
        ref_len=m,
        hyp_len=n,
    )


def error_rate(alignment: Alignment) -> Fraction:
    """(I + D + S) / N as an exact reduced rational.

    Not clamped: insertion-heavy hypotheses can push the rate above 1.
    """
    if alignment.ref_len == 0:
        raise EmptyReference()
    return Fraction(alignment.distance, alignment.ref_len)


def normalize_words(text: str) -> list[str]:
    """Lowercased word tokens with edge punctuation stripped.

    Apostrophes are kept so contractions survive ("that's" stays one token).
    """
    tokens = []
    for raw in text.split():
        token = raw.strip(_PUNCT_STRIP).lower()
        if token:
            tokens.append(token)
    return tokens
