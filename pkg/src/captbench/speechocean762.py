"""Speechocean762-style source adapter.

Maps the upstream corpus layout into the canonical `capt-corpus/1` schema.
Expected layout under the source root (only the first two are required):

    resource/scores.json   per-utterance annotation records (see below)
    train/text, test/text  Kaldi-style listings "UTT_ID  WORD TEXT..." that
                           define split membership
    train/wav.scp, test/wav.scp
                           optional "UTT_ID  PATH" audio references; missing
                           files are tolerated (metrics never read audio)
    {split}/utt2spk        optional "UTT_ID  SPEAKER" mapping; without it the
                           speaker id defaults to the first five characters
                           of the utterance id
    resource/spk2age       optional "SPEAKER  AGE" (integer years)
    resource/spk2gender    optional "SPEAKER  m|f"

Each scores.json record (keyed by utterance id):

    text                 sentence the speaker was asked to read
    accuracy, fluency, prosodic, completeness, total
                         sentence-level human scores, integers 0-10
                         (completeness may appear as a float; it is rounded)
    words                list of word records:
        text             the word
        phones           canonical phones, possibly with stress digits
                         ("AA1"); stress is stripped on ingestion and the
                         raw tokens kept in the record's raw_tokens sidecar
        phones-accuracy  per-phone accuracy, 0-2 scale, same length as
                         phones
        mispronunciations
                         list of {"index": word-local phone index,
                         "pronounced-phone": heard phone or "<del>"/"" for
                         a deletion}

A canonical position is flagged mispronounced when the annotation marks a
deletion, substitutes a different phone, or its phones-accuracy falls below
the configured threshold (default 0.5). The perceived sequence applies the
substitutions and deletions; threshold-only flags keep the canonical phone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import (
    Corpus,
    HumanScores,
    PhoneAnnotation,
    SpeakerMeta,
    Utterance,
    age_band,
    derive_perceived,
)
from .errors import CaptBenchError, PhoneValidationError, SchemaMismatch
from .phones import Phone, PhoneInventory, PhoneSequence, normalize_symbol, strip_stress

ADAPTER_NAME = "speechocean762"

_GENDER_MAP = {"m": "male", "f": "female", "male": "male", "female": "female"}
_DELETION_MARKERS = {"", "<del>"}


@dataclass(frozen=True)
class IngestOptions:
    lenient: bool = False
    phone_acc_threshold: float = 0.5


@dataclass
class IngestResult:
    corpus: Corpus
    errors: list[str] = field(default_factory=list)

    @property
    def counts(self) -> dict:
        out = {}
        for split in ("train", "test"):
            utts = self.corpus.split(split)
            out[split] = {
                "files": len(utts),
                "speakers": len({u.speaker.speaker_id for u in utts}),
            }
        return out


def _read_kaldi_map(path: Path) -> dict[str, str]:
    mapping = {}
    if not path.is_file():
        return mapping
    for line in path.read_text("utf-8").splitlines():
        parts = line.strip().split(None, 1)
        if parts:
            mapping[parts[0]] = parts[1] if len(parts) > 1 else ""
    return mapping


def _load_scores(source: Path) -> dict:
    for candidate in (source / "resource" / "scores.json", source / "scores.json"):
        if candidate.is_file():
            with candidate.open("r", encoding="utf-8") as fh:
                return json.load(fh)
    raise CaptBenchError(f"no scores.json under {source}")


def _speaker_table(source: Path) -> tuple[dict[str, str], dict[str, str]]:
    ages = {}
    genders = {}
    for base in (source / "resource", source / "train", source / "test"):
        ages.update(_read_kaldi_map(base / "spk2age"))
        genders.update(_read_kaldi_map(base / "spk2gender"))
    return ages, genders


def _score_int(record: dict, key: str, utt_id: str) -> int:
    if key not in record:
        raise SchemaMismatch(key, utt_id, "missing score")
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaMismatch(key, utt_id, f"non-numeric score {value!r}")
    rounded = int(round(float(value)))
    if not 0 <= rounded <= 10:
        raise SchemaMismatch(key, utt_id, f"score {value!r} outside 0-10")
    return rounded


def _build_utterance(
    utt_id: str,
    record: dict,
    split: str,
    audio_ref: str,
    speaker: SpeakerMeta,
    inventory: PhoneInventory,
    options: IngestOptions,
) -> Utterance:
    word_text = record.get("text") or ""
    if not word_text:
        raise SchemaMismatch("text", utt_id, "empty sentence")

    raw_canonical: list[str] = []
    canonical: list[Phone] = []
    annotations: list[PhoneAnnotation] = []
    offset = 0
    for w_index, word in enumerate(record.get("words", [])):
        phones = word.get("phones", [])
        accs = word.get("phones-accuracy")
        if accs is not None and len(accs) != len(phones):
            raise SchemaMismatch(
                "phones-accuracy", utt_id, f"word {w_index}: {len(accs)} values for {len(phones)} phones"
            )
        for p_index, raw in enumerate(phones):
            symbol = strip_stress(normalize_symbol(str(raw)))
            if symbol not in inventory:
                raise PhoneValidationError(utt_id, offset + p_index, raw)
            raw_canonical.append(str(raw))
            canonical.append(inventory.get(symbol))
            if accs is not None:
                annotations.append(
                    PhoneAnnotation(position=offset + p_index, accuracy=float(accs[p_index]))
                )
        for misp in word.get("mispronunciations", []):
            index = misp.get("index")
            if not isinstance(index, int) or not 0 <= index < len(phones):
                raise SchemaMismatch(
                    "mispronunciations", utt_id, f"word {w_index}: bad index {index!r}"
                )
            position = offset + index
            pronounced = misp.get("pronounced-phone", "")
            pronounced = "" if pronounced is None else str(pronounced).strip()
            acc = None
            if accs is not None:
                acc = float(accs[index])
            if pronounced.lower() in _DELETION_MARKERS:
                annotations.append(PhoneAnnotation(position, deleted=True, accuracy=acc))
            else:
                heard = strip_stress(normalize_symbol(pronounced))
                annotations.append(
                    PhoneAnnotation(position, heard=heard, accuracy=acc, heard_raw=pronounced)
                )
        offset += len(phones)

    # later annotations for a position win; explicit mispronunciations come
    # after the accuracy-only records built from phones-accuracy
    merged: dict[int, PhoneAnnotation] = {}
    for ann in annotations:
        previous = merged.get(ann.position)
        if previous is not None and ann.accuracy is None:
            ann = PhoneAnnotation(
                ann.position, ann.heard, ann.deleted, previous.accuracy, ann.heard_raw
            )
        merged[ann.position] = ann

    canonical_seq = PhoneSequence(tuple(canonical))
    perceived, flags = derive_perceived(
        canonical_seq,
        merged.values(),
        inventory,
        accuracy_threshold=options.phone_acc_threshold,
    )

    scores = HumanScores(
        accuracy=_score_int(record, "accuracy", utt_id),
        fluency=_score_int(record, "fluency", utt_id),
        prosodic=_score_int(record, "prosodic", utt_id),
        completeness=_score_int(record, "completeness", utt_id),
        total=_score_int(record, "total", utt_id),
    )

    raw_tokens = None
    heard_raw = {
        str(ann.position): ann.heard_raw
        for ann in merged.values()
        if ann.heard_raw is not None and ann.heard_raw != ann.heard
    }
    if raw_canonical != canonical_seq.symbols or heard_raw:
        raw_tokens = {"canonical": raw_canonical}
        if heard_raw:
            raw_tokens["heard"] = heard_raw

    return Utterance(
        utt_id=utt_id,
        speaker=speaker,
        audio_ref=audio_ref,
        word_text=word_text,
        canonical_phones=canonical_seq,
        perceived_phones=perceived,
        mispronounced=flags,
        scores=scores,
        split=split,
        raw_tokens=raw_tokens,
    )


def ingest(
    source_dir: str | Path,
    inventory: PhoneInventory,
    options: IngestOptions = IngestOptions(),
) -> IngestResult:
    """Read a Speechocean762-style source tree into a Corpus.

    In lenient mode records that fail validation are skipped and reported in
    the result's error list; otherwise the first failure raises.
    """
    source = Path(source_dir)
    if not source.is_dir():
        raise CaptBenchError(f"source directory not found: {source}")
    scores = _load_scores(source)
    ages, genders = _speaker_table(source)

    utterances = []
    errors: list[str] = []
    for split in ("train", "test"):
        text_map = _read_kaldi_map(source / split / "text")
        wav_map = _read_kaldi_map(source / split / "wav.scp")
        utt2spk = _read_kaldi_map(source / split / "utt2spk")
        for utt_id in sorted(text_map):
            speaker_id = utt2spk.get(utt_id) or utt_id[:5]
            age = ages.get(speaker_id)
            speaker = SpeakerMeta(
                speaker_id=speaker_id,
                age_band=age_band(int(age)) if age and age.isdigit() else "unknown",
                gender=_GENDER_MAP.get(genders.get(speaker_id, "").lower(), "unknown"),
            )
            audio_ref = wav_map.get(utt_id) or f"{split}/{utt_id}.wav"
            try:
                record = scores.get(utt_id)
                if record is None:
                    raise SchemaMismatch("scores.json", utt_id, "no annotation record")
                utterances.append(
                    _build_utterance(utt_id, record, split, audio_ref, speaker, inventory, options)
                )
            except CaptBenchError as exc:
                if not options.lenient:
                    raise
                errors.append(str(exc))

    corpus = Corpus(tuple(utterances), inventory, provenance=f"{ADAPTER_NAME}:{source}")
    return IngestResult(corpus=corpus, errors=errors)
