"""Task prompts, control tokens, and supervised fine-tuning pair assembly."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus
from .errors import SchemaMismatch
from .parsing import ApaScores, serialize_apa, serialize_mdd

APA = "APA"
MDD = "MDD"
TASKS = (APA, MDD)

CONTROL_TOKENS = {APA: "<|APA|>", MDD: "<|MDD|>"}

# Placeholder substituted with the backend's literal audio token when a pair
# is rendered into a training record.
AUDIO_PLACEHOLDER = "{audio}"

SFT_SCHEMA = "capt-sft/1"

APA_PROMPT = """Rate the pronunciation of the audio.

**Accuracy**
Score range: 0 - 10
* 9-10: The overall pronunciation of the sentence is excellent, with accurate phonology and no obvious pronunciation mistakes
* 7-8: The overall pronunciation of the sentence is good, with a few pronunciation mistakes
* 5-6: The overall pronunciation of the sentence is understandable, with many pronunciation mistakes and accent, but it does not affect the understanding of basic meanings
* 3-4: Poor, clumsy and rigid pronunciation of the sentence as a whole, with serious pronunciation mistakes
* 0-2: Extremely poor pronunciation and only one or two words are recognizable

**Fluency**
Score range: 0 - 10
* 8-10: Fluent without noticeable pauses or stammering
* 6-7: Fluent in general, with a few pauses, repetition, and stammering
* 4-5: The speech is a little disfluent, with many pauses, repetition, and stammering
* 0-3: Intermittent, very disfluent speech, with lots of pauses, repetition, and stammering

**Prosodic**
Score range: 0 - 10
* 9-10: Correct intonation at a stable speaking speed, speak with cadence, and can speak like a native
* 7-8: Nearly correct intonation at a stable speaking speed, nearly smooth and coherent, but with little stammering and few pauses
* 5-6: Unstable speech speed, many stammering and pauses with a poor sense of rhythm
* 3-4: Unstable speech speed, speak too fast or too slow, without the sense of rhythm
* 0-2: Poor intonation and lots of stammering and pauses, unable to read a complete sentence

**Total**
Score range: 0 - 10
Provide an overall assessment of the pronunciation quality considering all aspects of the speech. This should reflect your holistic evaluation of the speaker's pronunciation abilities based on the entire audio sample.
* 9-10: Excellent overall pronunciation that sounds nearly native-like
* 7-8: Good pronunciation with minor issues that don't affect comprehension
* 5-6: Fair pronunciation with noticeable non-native features but generally understandable
* 3-4: Poor pronunciation that requires effort to understand
* 0-2: Very poor pronunciation that is largely incomprehensible

Provide the results in the following JSON format:
{'accuracy': ACCURACY_SCORE, 'fluency': FLUENCY_SCORE, 'prosodic': PROSODIC_SCORE, 'total': TOTAL_SCORE}"""

MDD_PROMPT = """Transcribe the audio utterance, providing both a word-level transcript and phoneme-level breakdown.

For the phoneme breakdown, use the CMU Pronouncing Dictionary format (e.g., AA, IH).
If a word or phoneme is unclear, mark it with '<unk>'.

Provide the results in the following JSON format:
{'word_transcript': 'That's an interesting observation.', 'phoneme_transcript': 'DH EH S AX N IH N T AX R EH S T IH NG AA B Z AX R V EY IH SH AX N'}"""

_PROMPTS = {APA: APA_PROMPT, MDD: MDD_PROMPT}


@dataclass(frozen=True)
class SftPair:
    utt_id: str
    task: str
    user_text: str
    assistant_text: str
    audio_ref: str


def build_prompt(task: str, use_control_token: bool) -> str:
    """The task prompt, optionally prefixed with its control token."""
    prompt = _PROMPTS[task]
    if use_control_token:
        return f"{CONTROL_TOKENS[task]}\n{prompt}"
    return prompt


def build_sft(corpus: Corpus, split: str, use_control_token: bool) -> list[SftPair]:
    """Two pairs per utterance (APA + MDD), ordered by (utt_id, task).

    APA targets carry the four scored dimensions (completeness is excluded
    from scoring); MDD targets carry the sentence plus the perceived phones.
    """
    pairs = []
    for utt in sorted(corpus.split(split), key=lambda u: u.utt_id):
        for task in TASKS:
            prefix = f"{CONTROL_TOKENS[task]}\n" if use_control_token else ""
            user_text = f"{prefix}{AUDIO_PLACEHOLDER}\n{_PROMPTS[task]}"
            if task == APA:
                scores = ApaScores(
                    utt.scores.accuracy,
                    utt.scores.fluency,
                    utt.scores.prosodic,
                    utt.scores.total,
                )
                assistant_text = serialize_apa(scores)
            else:
                assistant_text = serialize_mdd(utt.word_text, utt.perceived_phones.render())
            pairs.append(SftPair(utt.utt_id, task, user_text, assistant_text, utt.audio_ref))
    return pairs


def render_chat(pair: SftPair, audio_token: str) -> dict:
    """Two-turn training record with the audio token substituted in."""
    if not audio_token:
        raise ValueError("audio_token must be nonempty")
    return {
        "utt_id": pair.utt_id,
        "task": pair.task,
        "user": pair.user_text.replace(AUDIO_PLACEHOLDER, audio_token, 1),
        "assistant": pair.assistant_text,
        "audio": pair.audio_ref,
    }


def parse_chat(record: dict, audio_token: str) -> SftPair:
    """Inverse of render_chat."""
    return SftPair(
        utt_id=record["utt_id"],
        task=record["task"],
        user_text=record["user"].replace(audio_token, AUDIO_PLACEHOLDER, 1),
        assistant_text=record["assistant"],
        audio_ref=record["audio"],
    )


def write_sft(pairs: list[SftPair], path: str | Path, audio_token: str) -> None:
    path = Path(path)
    header = {"schema": SFT_SCHEMA, "audio_token": audio_token}
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for pair in pairs:
            fh.write(json.dumps(render_chat(pair, audio_token), ensure_ascii=False) + "\n")


def read_sft(path: str | Path) -> tuple[list[SftPair], str]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("schema") != SFT_SCHEMA:
            raise SchemaMismatch("schema", str(path), f"expected {SFT_SCHEMA}")
        audio_token = header["audio_token"]
        pairs = [parse_chat(json.loads(line), audio_token) for line in fh if line.strip()]
    return pairs, audio_token
