"""Extraction of structured payloads from raw model text.

Model outputs are expected to end in a JSON-like object (single- or
double-quoted), but instruction-tuned models wrap it in prose, echo the
format example from the prompt, or emit quoted numbers. The parsers here
accept those shapes, record every repair they apply, and leave strictly
formatted payloads untouched (zero repairs). String values are sliced by
key anchors, so unescaped apostrophes inside single-quoted transcripts
("That's ...") parse fine.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Optional, Union

from .errors import MissingKey, NoObjectFound, NonNumericValue, SchemaMismatch
from .phones import PhoneInventory, PhoneSequence, tokenize_lenient

APA_KEYS = ("accuracy", "fluency", "prosodic", "total")
MDD_KEYS = ("word_transcript", "phoneme_transcript")

SCORE_MIN = 0
SCORE_MAX = 10


@dataclass(frozen=True)
class ApaScores:
    accuracy: int
    fluency: int
    prosodic: int
    total: int

    def as_dict(self) -> dict[str, int]:
        return {k: getattr(self, k) for k in APA_KEYS}


@dataclass(frozen=True)
class MddTranscripts:
    word_transcript: str
    phoneme_transcript: PhoneSequence
    raw_phoneme_text: str


@dataclass(frozen=True)
class ParseOutcome:
    utt_id: str
    task: str
    payload: Union[ApaScores, MddTranscripts, None]
    repairs: tuple[str, ...] = ()
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def serialize_apa(scores: ApaScores) -> str:
    """The strict single-quoted assistant payload for score targets."""
    return (
        f"{{'accuracy': {scores.accuracy}, 'fluency': {scores.fluency}, "
        f"'prosodic': {scores.prosodic}, 'total': {scores.total}}}"
    )


def serialize_mdd(word_transcript: str, phoneme_transcript: str) -> str:
    """The strict single-quoted assistant payload for transcript targets.

    Apostrophes inside the word transcript are emitted as-is; the parser
    recovers them by key anchoring.
    """
    return (
        f"{{'word_transcript': '{word_transcript}', "
        f"'phoneme_transcript': '{phoneme_transcript}'}}"
    )


def _object_spans(text: str) -> list[tuple[int, int]]:
    """Balanced {...} spans, outermost only."""
    spans = []
    depth = 0
    start = -1
    for i, ch in enumerate(text):
        if ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}" and depth > 0:
            depth -= 1
            if depth == 0:
                spans.append((start, i + 1))
    return spans


def _pick_span(text: str, required_keys: tuple[str, ...]) -> tuple[str, list[str]]:
    """Last object-like span containing the payload keys, plus span repairs.

    The prompts themselves print a literal format example, so a compliant
    model's answer is the last object in its output, not the first.
    """
    spans = _object_spans(text)
    if not spans:
        raise NoObjectFound()
    chosen = None
    for span in reversed(spans):
        body = text[span[0] : span[1]]
        if any(_find_keys(body, (key,)) for key in required_keys):
            chosen = span
            break
    if chosen is None:
        chosen = spans[-1]
    repairs = []
    if len(spans) > 1:
        repairs.append("earlier-object-skipped")
    if text[: chosen[0]].strip():
        repairs.append("prose-prefix-skipped")
    if text[chosen[1] :].strip():
        repairs.append("prose-suffix-skipped")
    return text[chosen[0] : chosen[1]], repairs


def _find_keys(body: str, keys: tuple[str, ...]) -> list[tuple[str, int, int]]:
    """(key, key_start, value_start) for each first occurrence, in text order."""
    found = {}
    for key in keys:
        pattern = re.compile(r"['\"]?" + re.escape(key) + r"['\"]?\s*:")
        m = pattern.search(body)
        if m and key not in found:
            found[key] = (m.start(), m.end())
    return sorted(
        ((key, start, end) for key, (start, end) in found.items()),
        key=lambda item: item[1],
    )


_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?")
_SCORE_VALUE_RE = re.compile(r"\s*(?:'([^',}]*)'|\"([^\",}]*)\"|(-?\d+(?:\.\d+)?))\s*(?=[,}])")


def _coerce_score(key: str, raw: str, quoted: bool, repairs: list[str]) -> int:
    raw = raw.strip()
    if not _NUMBER_RE.fullmatch(raw):
        raise NonNumericValue(key, raw)
    if quoted:
        repairs.append(f"quoted-number:{key}")
    value = Decimal(raw)
    if value != value.to_integral_value():
        repairs.append(f"rounded-value:{key}")
    score = int(value.quantize(Decimal(1), rounding=ROUND_HALF_UP))
    if score < SCORE_MIN or score > SCORE_MAX:
        repairs.append(f"clamped:{key}")
        score = min(max(score, SCORE_MIN), SCORE_MAX)
    return score


def parse_apa(text: str) -> tuple[ApaScores, list[str]]:
    """Pull the four integer scores out of raw model text.

    Accepts single/double-quoted keys, quoted or fractional numbers
    (rounded half-up), and clamps to [0, 10]; each step lands in repairs.
    Keys the model invents alongside the required four are ignored.
    """
    body, repairs = _pick_span(text, APA_KEYS)
    anchors = _find_keys(body, APA_KEYS)
    anchor_keys = [a[0] for a in anchors]
    for key in APA_KEYS:
        if key not in anchor_keys:
            raise MissingKey(key)
    values = {}
    for key, _start, value_start in anchors:
        match = _SCORE_VALUE_RE.match(body, value_start)
        if not match:
            snippet = body[value_start : value_start + 24].strip()
            raise NonNumericValue(key, snippet.split(",")[0].rstrip("}").strip())
        raw = next(group for group in match.groups() if group is not None)
        values[key] = _coerce_score(key, raw, match.group(3) is None, repairs)
    return ApaScores(**values), repairs


def _slice_string(key: str, raw: str, repairs: list[str]) -> str:
    raw = raw.strip()
    if raw.endswith(","):
        raw = raw[:-1].rstrip()
    if len(raw) >= 2 and raw[0] in "'\"" and raw[-1] == raw[0]:
        return raw[1:-1]
    repairs.append(f"unquoted-value:{key}")
    return raw


def parse_mdd(text: str, inventory: PhoneInventory) -> tuple[MddTranscripts, list[str]]:
    """Pull both transcripts out of raw model text.

    The phoneme field is tokenized leniently: stress digits are dropped and
    out-of-inventory tokens map to '<unk>'; both are recorded as repairs.
    String values are sliced between the two known key anchors (that is what
    lets unescaped apostrophes through), so an extra key the model invents
    between them would leak into the preceding value; transcripts win that
    trade-off.
    """
    body, repairs = _pick_span(text, MDD_KEYS)
    anchors = _find_keys(body, MDD_KEYS)
    anchor_keys = [a[0] for a in anchors]
    for key in MDD_KEYS:
        if key not in anchor_keys:
            raise MissingKey(key)
    raw_values = {}
    for idx, (key, _start, value_start) in enumerate(anchors):
        value_end = anchors[idx + 1][1] if idx + 1 < len(anchors) else len(body) - 1
        raw_values[key] = body[value_start:value_end]
    word = _slice_string("word_transcript", raw_values["word_transcript"], repairs)
    raw_phonemes = _slice_string("phoneme_transcript", raw_values["phoneme_transcript"], repairs)
    for token in raw_phonemes.split():
        stripped = token if token.lower() == "<unk>" else re.sub(r"[0-2]+$", "", token)
        if stripped != token:
            repairs.append(f"stress-stripped:{token}")
    phones, unknowns = tokenize_lenient(raw_phonemes, inventory, strip_stress_digits=True)
    repairs.extend(f"unknown-phone:{token}" for token, _pos in unknowns)
    return MddTranscripts(word, phones, raw_phonemes), repairs


PARSED_SCHEMA = "capt-parsed/1"


def write_parsed(outcomes: list[ParseOutcome], summary: dict, path) -> None:
    """Parsed-outcome file: payloads plus repair/failure diagnostics."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": PARSED_SCHEMA, "summary": summary}) + "\n")
        for outcome in outcomes:
            record = {
                "utt_id": outcome.utt_id,
                "task": outcome.task,
                "ok": outcome.ok,
                "repairs": list(outcome.repairs),
                "error": outcome.error,
            }
            if isinstance(outcome.payload, ApaScores):
                record["payload"] = outcome.payload.as_dict()
            elif isinstance(outcome.payload, MddTranscripts):
                record["payload"] = {
                    "word_transcript": outcome.payload.word_transcript,
                    "phoneme_transcript": outcome.payload.phoneme_transcript.render(),
                    "raw_phoneme_text": outcome.payload.raw_phoneme_text,
                }
            else:
                record["payload"] = None
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_parsed(path) -> tuple[list[dict], dict]:
    with Path(path).open("r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("schema") != PARSED_SCHEMA:
            raise SchemaMismatch("schema", str(path), f"expected {PARSED_SCHEMA}")
        records = [json.loads(line) for line in fh if line.strip()]
    return records, header


def parse_all(raw_responses, inventory: PhoneInventory) -> tuple[list[ParseOutcome], dict]:
    """One ParseOutcome per response; failures are data, not exceptions."""
    outcomes = []
    summary = {
        "total": 0,
        "parsed": 0,
        "failed": 0,
        "repaired": 0,
        "by_task": {},
    }
    for raw in raw_responses:
        summary["total"] += 1
        task_stats = summary["by_task"].setdefault(
            raw.task, {"total": 0, "parsed": 0, "failed": 0, "repaired": 0}
        )
        task_stats["total"] += 1
        if raw.error is not None:
            outcome = ParseOutcome(raw.utt_id, raw.task, None, (), f"backend error: {raw.error}")
        else:
            try:
                if raw.task == "APA":
                    payload, repairs = parse_apa(raw.text)
                else:
                    payload, repairs = parse_mdd(raw.text, inventory)
                outcome = ParseOutcome(raw.utt_id, raw.task, payload, tuple(repairs))
            except (NoObjectFound, MissingKey, NonNumericValue) as exc:
                outcome = ParseOutcome(raw.utt_id, raw.task, None, (), str(exc))
        outcomes.append(outcome)
        bucket = "parsed" if outcome.ok else "failed"
        summary[bucket] += 1
        task_stats[bucket] += 1
        if outcome.ok and outcome.repairs:
            summary["repaired"] += 1
            task_stats["repaired"] += 1
    return outcomes, summary
