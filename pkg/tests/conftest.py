import json
import os
from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("thorough", max_examples=1000, deadline=None)
if os.environ.get("HYPOTHESIS_PROFILE"):
    settings.load_profile(os.environ["HYPOTHESIS_PROFILE"])

from captbench.corpus import Corpus, HumanScores, SpeakerMeta, Utterance
from captbench.phones import load_inventory, tokenize
from captbench.speechocean762 import IngestOptions, ingest

FIXTURES = Path(__file__).parent / "fixtures"
MINI_CORPUS_DIR = FIXTURES / "mini_corpus"


@pytest.fixture(scope="session")
def inventory():
    return load_inventory()


@pytest.fixture(scope="session")
def ground_truth():
    return json.loads((FIXTURES / "ground_truth.json").read_text("utf-8"))


@pytest.fixture(scope="session")
def mini_corpus(inventory):
    return ingest(MINI_CORPUS_DIR, inventory, IngestOptions()).corpus


@pytest.fixture(scope="session")
def make_utt(inventory):
    """Factory for hand-built utterances in unit tests."""

    def build(
        utt_id="u1",
        canonical="K AE T",
        perceived=None,
        flags=None,
        scores=(8, 7, 9, 10, 8),
        word_text="the cat",
        split="test",
        speaker_id="spk1",
    ):
        canonical_seq = tokenize(canonical, inventory)
        perceived_seq = tokenize(perceived if perceived is not None else canonical, inventory)
        if flags is None:
            flags = tuple(False for _ in range(len(canonical_seq)))
        accuracy, fluency, prosodic, completeness, total = scores
        return Utterance(
            utt_id=utt_id,
            speaker=SpeakerMeta(speaker_id),
            audio_ref=f"{utt_id}.wav",
            word_text=word_text,
            canonical_phones=canonical_seq,
            perceived_phones=perceived_seq,
            mispronounced=tuple(flags),
            scores=HumanScores(accuracy, fluency, prosodic, completeness, total),
            split=split,
        )

    return build


@pytest.fixture(scope="session")
def make_corpus(inventory):
    def build(utterances):
        return Corpus(tuple(utterances), inventory, provenance="unit-test")

    return build
