"""Mispronunciation-detection counts and precision/recall/F1.

Detection is anchored on the canonical sequence: a canonical position
counts as detected when the hypothesis alignment substitutes or deletes
it. Truth comes from the human per-phone annotation flags. Hypothesis
insertions have no canonical anchor; they are tallied separately and do
not enter the confusion counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .align import DELETE, SUBSTITUTE, align, error_rate
from .corpus import Utterance
from .errors import LengthMismatch, NoScorableUtterances
from .phones import PhoneSequence


@dataclass(frozen=True)
class MddCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other: "MddCounts") -> "MddCounts":
        return MddCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )

    @property
    def positions(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MddScores:
    precision: float
    recall: float
    f1: float
    counts: MddCounts
    degenerate: bool = False


def flag_detected(canonical: PhoneSequence, hypothesis: PhoneSequence) -> list[bool]:
    """True at each canonical position the hypothesis substitutes or deletes."""
    flags = [False] * len(canonical)
    for op in align(canonical.symbols, hypothesis.symbols).ops:
        if op.kind in (SUBSTITUTE, DELETE):
            flags[op.ref_index] = True
    return flags


def _heard_map(canonical: PhoneSequence, other: PhoneSequence) -> dict[int, Optional[str]]:
    """Per flagged canonical position, the phone heard there (None = deleted)."""
    heard: dict[int, Optional[str]] = {}
    for op in align(canonical.symbols, other.symbols).ops:
        if op.kind == SUBSTITUTE:
            heard[op.ref_index] = other.symbols[op.hyp_index]
        elif op.kind == DELETE:
            heard[op.ref_index] = None
    return heard


def mdd_counts(detected: list[bool], truth: list[bool]) -> MddCounts:
    if len(detected) != len(truth):
        raise LengthMismatch(len(truth), len(detected))
    tp = fp = fn = tn = 0
    for d, t in zip(detected, truth):
        if d and t:
            tp += 1
        elif d:
            fp += 1
        elif t:
            fn += 1
        else:
            tn += 1
    return MddCounts(tp, fp, fn, tn)


def mdd_scores(counts: MddCounts) -> MddScores:
    """Precision, recall, and their harmonic mean.

    Any zero denominator yields 0.0 for the affected score and sets the
    degenerate flag.
    """
    degenerate = False
    if counts.tp + counts.fp > 0:
        precision = counts.tp / (counts.tp + counts.fp)
    else:
        precision, degenerate = 0.0, True
    if counts.tp + counts.fn > 0:
        recall = counts.tp / (counts.tp + counts.fn)
    else:
        recall, degenerate = 0.0, True
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1, degenerate = 0.0, True
    return MddScores(precision, recall, f1, counts, degenerate)


@dataclass(frozen=True)
class UtteranceMdd:
    """Per-utterance detection row, including the PER the correlation study reads."""

    utt_id: str
    counts: MddCounts
    insertions: int
    per: Optional[Fraction]
    per_ref_len: int
    per_errors: int
    diagnosis_correct: int
    diagnosis_total: int


def score_utterance(
    utt: Utterance,
    hypothesis: PhoneSequence,
    *,
    per_reference: str = "perceived",
) -> UtteranceMdd:
    detected = flag_detected(utt.canonical_phones, hypothesis)
    counts = mdd_counts(detected, list(utt.mispronounced))

    hyp_align = align(utt.canonical_phones.symbols, hypothesis.symbols)

    ref_seq = utt.perceived_phones if per_reference == "perceived" else utt.canonical_phones
    per_align = align(ref_seq.symbols, hypothesis.symbols)
    per = error_rate(per_align) if per_align.ref_len else None

    # diagnosis: on true positives, did the model hear what the human heard
    model_heard = _heard_map(utt.canonical_phones, hypothesis)
    human_heard = _heard_map(utt.canonical_phones, utt.perceived_phones)
    diagnosis_correct = diagnosis_total = 0
    for position, heard in model_heard.items():
        if utt.mispronounced[position] and position in human_heard:
            diagnosis_total += 1
            if heard == human_heard[position]:
                diagnosis_correct += 1

    return UtteranceMdd(
        utt_id=utt.utt_id,
        counts=counts,
        insertions=hyp_align.insertions,
        per=per,
        per_ref_len=per_align.ref_len,
        per_errors=per_align.distance,
        diagnosis_correct=diagnosis_correct,
        diagnosis_total=diagnosis_total,
    )


def corpus_mdd(rows: list[UtteranceMdd]) -> MddScores:
    """Micro-average: counts pooled over utterances before the F1 formula."""
    if not rows:
        raise NoScorableUtterances("no utterances with parsed MDD output")
    total = MddCounts()
    for row in rows:
        total = total + row.counts
    return mdd_scores(total)


def pooled_per(rows: list[UtteranceMdd]) -> Optional[Fraction]:
    """Corpus PER: summed edit errors over summed reference lengths."""
    errors = sum(r.per_errors for r in rows)
    ref_len = sum(r.per_ref_len for r in rows)
    if ref_len == 0:
        return None
    return Fraction(errors, ref_len)
