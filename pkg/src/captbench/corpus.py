"""Canonical corpus schema and annotation-to-perceived derivation.

The internal record format is corpus-agnostic; source adapters (see
speechocean762.py) map upstream layouts into it. Files are
newline-delimited JSON with a `capt-corpus/1` header line, so a corpus
round-trips byte-identically and downstream stages never touch the
upstream source again.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .errors import SchemaMismatch
from .phones import Phone, PhoneInventory, PhoneSequence, UNK

CORPUS_SCHEMA = "capt-corpus/1"

AGE_BANDS = ("under20", "twenties", "thirties", "forties", "fifty_plus", "unknown")
GENDERS = ("male", "female", "unknown")
SPLITS = ("train", "test")

SCORE_DIMENSIONS = ("accuracy", "fluency", "prosodic", "completeness", "total")


def age_band(age: Optional[int]) -> str:
    if age is None:
        return "unknown"
    if age < 20:
        return "under20"
    if age < 30:
        return "twenties"
    if age < 40:
        return "thirties"
    if age < 50:
        return "forties"
    return "fifty_plus"


@dataclass(frozen=True)
class SpeakerMeta:
    speaker_id: str
    age_band: str = "unknown"
    gender: str = "unknown"

    def __post_init__(self):
        if not self.speaker_id:
            raise ValueError("speaker_id must be nonempty")
        if self.age_band not in AGE_BANDS:
            raise ValueError(f"bad age band {self.age_band!r}")
        if self.gender not in GENDERS:
            raise ValueError(f"bad gender {self.gender!r}")


@dataclass(frozen=True)
class HumanScores:
    accuracy: int
    fluency: int
    prosodic: int
    completeness: int
    total: int

    def __post_init__(self):
        for dim in SCORE_DIMENSIONS:
            value = getattr(self, dim)
            if not isinstance(value, int) or not 0 <= value <= 10:
                raise ValueError(f"score {dim}={value!r} outside 0-10")

    def as_dict(self) -> dict[str, int]:
        return {dim: getattr(self, dim) for dim in SCORE_DIMENSIONS}


@dataclass(frozen=True)
class PhoneAnnotation:
    """One annotated canonical position: what was heard there, if anything.

    heard=None, deleted=False means the annotation carries only a per-phone
    accuracy; the canonical phone is kept in the perceived sequence.
    """

    position: int
    heard: Optional[str] = None
    deleted: bool = False
    accuracy: Optional[float] = None
    heard_raw: Optional[str] = None


@dataclass(frozen=True)
class Utterance:
    utt_id: str
    speaker: SpeakerMeta
    audio_ref: str
    word_text: str
    canonical_phones: PhoneSequence
    perceived_phones: PhoneSequence
    mispronounced: tuple[bool, ...]
    scores: HumanScores
    split: str
    raw_tokens: Optional[dict] = None

    def __post_init__(self):
        if not self.word_text:
            raise ValueError(f"utterance {self.utt_id}: empty word_text")
        if self.split not in SPLITS:
            raise ValueError(f"utterance {self.utt_id}: bad split {self.split!r}")
        if len(self.mispronounced) != len(self.canonical_phones):
            raise ValueError(
                f"utterance {self.utt_id}: {len(self.mispronounced)} flags for "
                f"{len(self.canonical_phones)} canonical phones"
            )


@dataclass(frozen=True)
class Corpus:
    utterances: tuple[Utterance, ...]
    inventory: PhoneInventory
    provenance: str

    def __post_init__(self):
        seen = set()
        for utt in self.utterances:
            if utt.utt_id in seen:
                raise ValueError(f"duplicate utt_id {utt.utt_id!r}")
            seen.add(utt.utt_id)

    def split(self, name: str) -> list[Utterance]:
        return [u for u in self.utterances if u.split == name]

    def by_id(self) -> dict[str, Utterance]:
        return {u.utt_id: u for u in self.utterances}


def derive_perceived(
    canonical: PhoneSequence,
    annotations: Iterable[PhoneAnnotation],
    inventory: PhoneInventory,
    *,
    accuracy_threshold: float = 0.5,
) -> tuple[PhoneSequence, tuple[bool, ...]]:
    """Build the perceived sequence and mispronunciation flags.

    A position is flagged when its annotation marks a deletion, substitutes a
    different phone, or carries a per-phone accuracy below the threshold.
    Positions without annotations are taken as pronounced correctly. The
    result is independent of annotation order.
    """
    by_position: dict[int, PhoneAnnotation] = {}
    for ann in annotations:
        if not 0 <= ann.position < len(canonical):
            raise SchemaMismatch("annotation.position", "?", f"index {ann.position} out of range")
        by_position[ann.position] = ann

    perceived: list[Phone] = []
    flags: list[bool] = []
    for i, phone in enumerate(canonical):
        ann = by_position.get(i)
        if ann is None:
            perceived.append(phone)
            flags.append(False)
            continue
        flagged = False
        if ann.accuracy is not None and ann.accuracy < accuracy_threshold:
            flagged = True
        if ann.deleted:
            flags.append(True)
            continue
        if ann.heard is not None and ann.heard != phone.symbol:
            flagged = True
            symbol = ann.heard if ann.heard in inventory else UNK
            perceived.append(inventory.get(symbol))
        else:
            perceived.append(phone)
        flags.append(flagged)
    return PhoneSequence(tuple(perceived)), tuple(flags)


def corpus_stats(corpus: Corpus) -> dict:
    """Per-split counts and demographic percentages, computed from the data."""
    out = {}
    for split_name in SPLITS:
        utts = corpus.split(split_name)
        speakers = {}
        for utt in utts:
            speakers[utt.speaker.speaker_id] = utt.speaker
        n_speakers = len(speakers)

        def _pct_table(values: Iterable[str], domain: tuple[str, ...]) -> dict:
            counts = {key: 0 for key in domain}
            for value in values:
                counts[value] += 1
            table = {}
            for key, count in counts.items():
                if count == 0:
                    continue
                pct = round(100.0 * count / n_speakers, 1) if n_speakers else 0.0
                table[key] = {"pct": pct, "n": count}
            return table

        total_phones = sum(len(u.canonical_phones) for u in utts)
        flagged = sum(sum(u.mispronounced) for u in utts)
        out[split_name] = {
            "files": len(utts),
            "speakers": n_speakers,
            "age": _pct_table((s.age_band for s in speakers.values()), AGE_BANDS),
            "gender": _pct_table((s.gender for s in speakers.values()), GENDERS),
            "phones": total_phones,
            "mispronounced_phones": flagged,
            "mispronounced_phone_rate": (flagged / total_phones) if total_phones else 0.0,
        }
    return out


def _utt_to_record(utt: Utterance) -> dict:
    record = {
        "utt_id": utt.utt_id,
        "speaker": {
            "speaker_id": utt.speaker.speaker_id,
            "age_band": utt.speaker.age_band,
            "gender": utt.speaker.gender,
        },
        "audio_ref": utt.audio_ref,
        "word_text": utt.word_text,
        "canonical_phones": utt.canonical_phones.render(),
        "perceived_phones": utt.perceived_phones.render(),
        "mispronounced": list(utt.mispronounced),
        "scores": utt.scores.as_dict(),
        "split": utt.split,
    }
    if utt.raw_tokens:
        record["raw_tokens"] = utt.raw_tokens
    return record


def _record_to_utt(record: dict, inventory: PhoneInventory) -> Utterance:
    from .phones import tokenize

    speaker = record["speaker"]
    return Utterance(
        utt_id=record["utt_id"],
        speaker=SpeakerMeta(speaker["speaker_id"], speaker["age_band"], speaker["gender"]),
        audio_ref=record["audio_ref"],
        word_text=record["word_text"],
        canonical_phones=tokenize(record["canonical_phones"], inventory),
        perceived_phones=tokenize(record["perceived_phones"], inventory),
        mispronounced=tuple(bool(x) for x in record["mispronounced"]),
        scores=HumanScores(**record["scores"]),
        split=record["split"],
        raw_tokens=record.get("raw_tokens"),
    )


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    path = Path(path)
    header = {
        "schema": CORPUS_SCHEMA,
        "inventory": {"name": corpus.inventory.name, "symbols": corpus.inventory.symbols},
        "provenance": corpus.provenance,
    }
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for utt in corpus.utterances:
            fh.write(json.dumps(_utt_to_record(utt), ensure_ascii=False) + "\n")


def read_corpus(path: str | Path) -> Corpus:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise SchemaMismatch("header", str(path), "empty file")
        header = json.loads(header_line)
        if header.get("schema") != CORPUS_SCHEMA:
            raise SchemaMismatch("schema", str(path), f"expected {CORPUS_SCHEMA}")
        inventory = PhoneInventory.from_symbols(
            header["inventory"]["symbols"], name=header["inventory"].get("name", "corpus")
        )
        utterances = []
        for line in fh:
            if line.strip():
                utterances.append(_record_to_utt(json.loads(line), inventory))
    return Corpus(tuple(utterances), inventory, header.get("provenance", str(path)))
