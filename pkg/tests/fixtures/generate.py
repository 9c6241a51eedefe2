#!/usr/bin/env python3
"""Build the bundled mini-corpus fixture and pin its ground-truth values.

Run from the repository root after any change to the fixture design:

    python3 tests/fixtures/generate.py

What gets written (all committed):
    mini_corpus/              20-utterance source tree in the upstream layout
    ground_truth.json         values computed here with independent oracles
    stored_predictions.ndjson raw-response fixture with known score errors
    golden_report.json        byte-pinned report of the seeded noisy run

Every edit spec is checked for alignment recoverability: across ALL
minimal-cost edit scripts between canonical and perceived, the set of
flagged canonical positions must be unique and equal to the annotated
truth. That keeps detection metrics exact for the oracle mock no matter
which tie-breaking a correct aligner uses.
"""

from __future__ import annotations

import functools
import json
import random
import re
import sys
from fractions import Fraction
from pathlib import Path

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE.parent))  # for oracles

from oracles import brute_force_distance, mp_pearson  # noqa: E402

from captbench import inference  # noqa: E402
from captbench.corpus import write_corpus  # noqa: E402
from captbench.phones import load_inventory, strip_stress  # noqa: E402
from captbench.service import ops, schemas  # noqa: E402
from captbench.speechocean762 import IngestOptions, ingest  # noqa: E402

LEXICON = {
    "that's": ["DH", "AE1", "T", "S"],
    "an": ["AX", "N"],
    "interesting": ["IH1", "N", "T", "AX", "R", "AX", "S", "T", "IH0", "NG"],
    "observation": ["AA2", "B", "Z", "AX", "R", "V", "EY1", "IH", "SH", "AX", "N"],
    "the": ["DH", "AX"],
    "cat": ["K", "AE1", "T"],
    "sat": ["S", "AE1", "T"],
    "on": ["AA1", "N"],
    "a": ["AX"],
    "mat": ["M", "AE1", "T"],
    "she": ["SH", "IY1"],
    "reads": ["R", "IY1", "D", "Z"],
    "books": ["B", "UH1", "K", "S"],
    "every": ["EH1", "V", "R", "IY"],
    "day": ["D", "EY1"],
    "children": ["CH", "IH1", "L", "D", "R", "AX", "N"],
    "play": ["P", "L", "EY1"],
    "outside": ["AW1", "T", "S", "AY2", "D"],
    "birds": ["B", "ER1", "D", "Z"],
    "sing": ["S", "IH1", "NG"],
    "in": ["IH0", "N"],
    "morning": ["M", "AO1", "R", "N", "IH", "NG"],
    "dog": ["D", "AO1", "G"],
    "runs": ["R", "AH1", "N", "Z"],
    "fast": ["F", "AE1", "S", "T"],
    "he": ["HH", "IY1"],
    "likes": ["L", "AY1", "K", "S"],
    "green": ["G", "R", "IY1", "N"],
    "tea": ["T", "IY1"],
    "we": ["W", "IY1"],
    "walk": ["W", "AO1", "K"],
    "to": ["T", "UW0"],
    "school": ["S", "K", "UW1", "L"],
    "together": ["T", "UW0", "G", "EH1", "DH", "ER0"],
    "baby": ["B", "EY1", "B", "IY"],
    "smiled": ["S", "M", "AY1", "L", "D"],
    "happily": ["HH", "AE1", "P", "AX", "L", "IY"],
    "rain": ["R", "EY1", "N"],
    "falls": ["F", "AO1", "L", "Z"],
    "from": ["F", "R", "AH1", "M"],
    "dark": ["D", "AA1", "R", "K"],
    "clouds": ["K", "L", "AW1", "D", "Z"],
    "students": ["S", "T", "UW1", "D", "AX", "N", "T", "S"],
    "study": ["S", "T", "AH1", "D", "IY"],
    "library": ["L", "AY1", "B", "R", "EH", "R", "IY"],
    "my": ["M", "AY1"],
    "brother": ["B", "R", "AH1", "DH", "ER0"],
    "fixed": ["F", "IH1", "K", "S", "T"],
    "car": ["K", "AA1", "R"],
    "flowers": ["F", "L", "AW1", "ER", "Z"],
    "bloom": ["B", "L", "UW1", "M"],
    "spring": ["S", "P", "R", "IH1", "NG"],
    "time": ["T", "AY1", "M"],
    "teacher": ["T", "IY1", "CH", "ER0"],
    "asked": ["AE1", "S", "K", "T"],
    "question": ["K", "W", "EH1", "S", "CH", "AX", "N"],
    "music": ["M", "Y", "UW1", "Z", "IH", "K"],
    "makes": ["M", "EY1", "K", "S"],
    "people": ["P", "IY1", "P", "AX", "L"],
    "happy": ["HH", "AE1", "P", "IY"],
    "water": ["W", "AO1", "T", "ER0"],
    "flows": ["F", "L", "OW1", "Z"],
    "down": ["D", "AW1", "N"],
    "river": ["R", "IH1", "V", "ER0"],
    "i": ["AY1"],
    "enjoy": ["EH0", "N", "JH", "OY1"],
    "reading": ["R", "IY1", "D", "IH", "NG"],
    "short": ["SH", "AO1", "R", "T"],
    "stories": ["S", "T", "AO1", "R", "IY", "Z"],
    "sun": ["S", "AH1", "N"],
    "rises": ["R", "AY1", "Z", "IH", "Z"],
    "trees": ["T", "R", "IY1", "Z"],
    "grow": ["G", "R", "OW1"],
    "tall": ["T", "AO1", "L"],
    "and": ["AX", "N", "D"],
    "strong": ["S", "T", "R", "AO1", "NG"],
    "good": ["G", "UH1", "D"],
    "friends": ["F", "R", "EH1", "N", "D", "Z"],
    "help": ["HH", "EH1", "L", "P"],
    "each": ["IY1", "CH"],
    "other": ["AH1", "DH", "ER0"],
}

# (sentence, edits); edits are utterance-level: ("sub", position, heard) or
# ("del", position). Positions index the concatenated canonical phones.
SENTENCES = [
    ("That's an interesting observation.", [("sub", 1, "EH"), ("del", 2), ("sub", 11, "EH")]),
    ("The cat sat on a mat.", [("sub", 3, "AA")]),
    ("She reads books every day.", []),
    ("Children play outside.", [("del", 5), ("sub", 9, "IY")]),
    ("Birds sing in the morning.", [("sub", 1, "AX")]),
    ("The dog runs fast.", [("sub", 3, "AA"), ("sub", 10, "EH")]),
    ("He likes green tea.", [("del", 0)]),
    ("We walk to school together.", []),
    ("The baby smiled happily.", [("sub", 8, "AA"), ("del", 14)]),
    ("Rain falls from dark clouds.", [("sub", 4, "OW")]),
    ("Students study in the library.", [("sub", 4, "EH"), ("del", 21)]),
    ("My brother fixed the car.", []),
    ("Flowers bloom in spring time.", [("sub", 7, "UH")]),
    ("The teacher asked a question.", [("sub", 6, "EH"), ("sub", 13, "IH")]),
    ("Music makes people happy.", [("del", 1)]),
    ("Water flows down the river.", [("sub", 1, "AA"), ("sub", 13, "IY")]),
    ("I enjoy reading short stories.", []),
    ("The sun rises every morning.", [("sub", 3, "AA"), ("del", 8)]),
    ("Trees grow tall and strong.", [("sub", 6, "AO")]),
    ("Good friends help each other.", [("del", 10), ("sub", 15, "AX")]),
]

SPEAKERS = [
    ("00001", 15, "m"),
    ("00002", 22, "f"),
    ("00003", 34, "m"),
    ("00004", 45, "f"),
]

NOISY_SEED = 42
NOISY_RATE = 0.1
PRED_SEED = 123
SCORE_SEED = 2024


def sentence_words(sentence: str) -> list[str]:
    return [w.strip(".,!?").lower() for w in sentence.split()]


def canonical_phones(sentence: str) -> tuple[list[str], list[list[str]]]:
    per_word = [LEXICON[w] for w in sentence_words(sentence)]
    flat = [strip_stress(p) for word in per_word for p in word]
    return flat, per_word


def apply_edits(canonical: list[str], edits) -> tuple[list[str], set[int]]:
    flagged = set()
    heard: dict[int, str | None] = {}
    for edit in edits:
        if edit[0] == "sub":
            _, pos, phone = edit
            assert phone != canonical[pos], (edit, canonical[pos])
            heard[pos] = phone
        else:
            _, pos = edit
            heard[pos] = None
        flagged.add(edit[1])
    perceived = []
    for i, phone in enumerate(canonical):
        if i in heard:
            if heard[i] is not None:
                perceived.append(heard[i])
        else:
            perceived.append(phone)
    return perceived, flagged


def minimal_flag_sets(ref: tuple[str, ...], hyp: tuple[str, ...]) -> frozenset:
    """All distinct sets of flagged ref positions over minimal edit scripts."""
    n, m = len(ref), len(hyp)

    @functools.lru_cache(maxsize=None)
    def dist(i, j):
        if i == n:
            return m - j
        if j == m:
            return n - i
        return min(
            dist(i + 1, j + 1) + (ref[i] != hyp[j]),
            dist(i + 1, j) + 1,
            dist(i, j + 1) + 1,
        )

    @functools.lru_cache(maxsize=None)
    def go(i, j):
        if i == n:
            return frozenset([frozenset()])
        if j == m:
            return frozenset([frozenset(range(i, n))])
        best = dist(i, j)
        out = set()
        sub_cost = 0 if ref[i] == hyp[j] else 1
        if dist(i + 1, j + 1) + sub_cost == best:
            for fs in go(i + 1, j + 1):
                out.add(fs | {i} if sub_cost else fs)
        if dist(i + 1, j) + 1 == best:
            for fs in go(i + 1, j):
                out.add(fs | {i})
        if dist(i, j + 1) + 1 == best:
            out |= go(i, j + 1)
        return frozenset(out)

    return go(0, 0)


def build_utterances():
    rng = random.Random(SCORE_SEED)
    utts = []
    for index, (sentence, edits) in enumerate(SENTENCES):
        speaker_id, _age, _gender = SPEAKERS[index // 5]
        utt_id = f"{speaker_id}{index % 5 + 1:04d}"
        canonical, per_word = canonical_phones(sentence)
        perceived, flagged = apply_edits(canonical, edits)

        sets = minimal_flag_sets(tuple(canonical), tuple(perceived))
        assert sets == frozenset([frozenset(flagged)]), (
            f"{utt_id}: ambiguous or wrong edit spec: {sorted(map(sorted, sets))} "
            f"vs truth {sorted(flagged)}"
        )

        n_edits = len(edits)
        accuracy = max(2, min(10, 10 - 2 * n_edits + rng.choice([-1, 0, 0])))
        fluency = max(2, min(10, 9 - n_edits + rng.choice([-1, 0, 1])))
        prosodic = max(2, min(10, 9 - n_edits + rng.choice([-1, 0, 1])))
        total = max(0, min(10, round((accuracy + fluency + prosodic) / 3)))
        utts.append(
            {
                "utt_id": utt_id,
                "speaker": speaker_id,
                "sentence": sentence,
                "per_word": per_word,
                "canonical": canonical,
                "perceived": perceived,
                "flags": [i in flagged for i in range(len(canonical))],
                "edits": edits,
                "scores": {
                    "accuracy": accuracy,
                    "fluency": fluency,
                    "prosodic": prosodic,
                    "completeness": 10,
                    "total": total,
                },
                "rng": rng,
            }
        )
    return utts


def write_source_tree(utts):
    root = HERE / "mini_corpus"
    (root / "resource").mkdir(parents=True, exist_ok=True)
    (root / "train").mkdir(exist_ok=True)
    (root / "test").mkdir(exist_ok=True)

    rng = random.Random(SCORE_SEED + 1)
    scores = {}
    for utt in utts:
        words = sentence_words(utt["sentence"])
        edit_by_pos = {e[1]: e for e in utt["edits"]}
        word_records = []
        offset = 0
        for word, phones in zip(words, utt["per_word"]):
            accs = []
            mispros = []
            for local, _phone in enumerate(phones):
                position = offset + local
                if position in edit_by_pos:
                    accs.append(round(rng.uniform(0.0, 0.4), 1))
                    edit = edit_by_pos[position]
                    mispros.append(
                        {
                            "index": local,
                            "pronounced-phone": "<del>" if edit[0] == "del" else edit[2],
                        }
                    )
                else:
                    accs.append(round(rng.uniform(1.4, 2.0), 1))
            word_records.append(
                {
                    "text": word.upper(),
                    "phones": phones,
                    "phones-accuracy": accs,
                    "mispronunciations": mispros,
                }
            )
            offset += len(phones)
        scores[utt["utt_id"]] = {
            "text": utt["sentence"],
            **utt["scores"],
            "words": word_records,
        }

    (root / "resource" / "scores.json").write_text(
        json.dumps(scores, indent=1, sort_keys=True) + "\n", "utf-8"
    )
    (root / "resource" / "spk2age").write_text(
        "".join(f"{spk}\t{age}\n" for spk, age, _ in SPEAKERS), "utf-8"
    )
    (root / "resource" / "spk2gender").write_text(
        "".join(f"{spk}\t{gender}\n" for spk, _, gender in SPEAKERS), "utf-8"
    )
    (root / "train" / "text").write_text("", "utf-8")
    with (root / "test" / "text").open("w", encoding="utf-8") as fh:
        for utt in utts:
            upper = utt["sentence"].upper().strip(".")
            fh.write(f"{utt['utt_id']}\t{upper}\n")
    with (root / "test" / "wav.scp").open("w", encoding="utf-8") as fh:
        for utt in utts:
            fh.write(f"{utt['utt_id']}\tWAVE/SPEAKER{utt['speaker']}/{utt['utt_id']}.WAV\n")
    with (root / "test" / "utt2spk").open("w", encoding="utf-8") as fh:
        for utt in utts:
            fh.write(f"{utt['utt_id']}\t{utt['speaker']}\n")
    return root


def cross_check_ingest(root, utts):
    """Production ingest must reproduce the generator's own derivation."""
    inventory = load_inventory()
    corpus = ingest(root, inventory, IngestOptions()).corpus
    assert len(corpus.utterances) == len(utts)
    by_id = corpus.by_id()
    for utt in utts:
        got = by_id[utt["utt_id"]]
        assert got.canonical_phones.symbols == utt["canonical"], utt["utt_id"]
        assert got.perceived_phones.symbols == utt["perceived"], utt["utt_id"]
        assert list(got.mispronounced) == utt["flags"], utt["utt_id"]
        assert got.scores.accuracy == utt["scores"]["accuracy"]
    return corpus


PHONEME_FIELD = re.compile(r"'phoneme_transcript':\s*'([^}]*)'}")


def extract_phonemes(payload: str) -> list[str]:
    match = PHONEME_FIELD.search(payload)
    assert match, payload
    return match.group(1).split()


def pooled_oracle_per(pairs) -> tuple[int, int, Fraction]:
    errors = sum(brute_force_distance(ref, hyp) for ref, hyp in pairs)
    ref_len = sum(len(ref) for ref, _ in pairs)
    return errors, ref_len, Fraction(errors, ref_len)


def main():
    utts = build_utterances()
    root = write_source_tree(utts)
    corpus = cross_check_ingest(root, utts)
    by_id = corpus.by_id()

    total_phones = sum(len(u["canonical"]) for u in utts)
    flagged_phones = sum(sum(u["flags"]) for u in utts)
    assert flagged_phones > 0

    # canonical mock: hypothesis == canonical, PER reference == perceived
    canonical_pairs = [(tuple(u["perceived"]), tuple(u["canonical"])) for u in utts]
    canonical_errors, canonical_ref_len, canonical_per = pooled_oracle_per(canonical_pairs)

    # noisy mock: pin PER from the seeded generator, scored with the oracle DP
    policy = inference.MockPolicy(mode="noisy", seed=NOISY_SEED, substitution_rate=NOISY_RATE)
    noisy_pairs = []
    for u in utts:
        payload = inference.mock_respond(by_id[u["utt_id"]], "MDD", policy, corpus.inventory)
        noisy_pairs.append((tuple(u["perceived"]), tuple(extract_phonemes(payload))))
    noisy_errors, noisy_ref_len, noisy_per = pooled_oracle_per(noisy_pairs)

    # stored predictions: known predicted scores + noisy transcripts
    pred_rng = random.Random(PRED_SEED)
    predicted = {}
    responses = []
    mdd_policy = inference.MockPolicy(mode="noisy", seed=7, substitution_rate=0.15)
    for u in utts:
        scores = u["scores"]
        pred = {
            dim: max(0, min(10, scores[dim] + pred_rng.choice([-2, -1, -1, 0, 0, 1, 1, 2])))
            for dim in ("accuracy", "fluency", "prosodic", "total")
        }
        predicted[u["utt_id"]] = pred
        apa_text = (
            f"{{'accuracy': {pred['accuracy']}, 'fluency': {pred['fluency']}, "
            f"'prosodic': {pred['prosodic']}, 'total': {pred['total']}}}"
        )
        mdd_text = inference.mock_respond(by_id[u["utt_id"]], "MDD", mdd_policy, corpus.inventory)
        responses.append(inference.RawResponse(u["utt_id"], "APA", apa_text, 0, "fixture:stored-predictions"))
        responses.append(inference.RawResponse(u["utt_id"], "MDD", mdd_text, 0, "fixture:stored-predictions"))
    responses.sort(key=lambda r: (r.utt_id, r.task))
    inference.write_raw(
        responses,
        HERE / "stored_predictions.ndjson",
        backend_id="fixture:stored-predictions",
        tasks=["APA", "MDD"],
        control_tokens=True,
    )

    stored_pcc = {}
    for dim in ("accuracy", "fluency", "prosodic", "total"):
        human = [u["scores"][dim] for u in utts]
        pred = [predicted[u["utt_id"]][dim] for u in utts]
        assert len(set(pred)) > 1, f"constant predictions for {dim}"
        r, p = mp_pearson(human, pred)
        stored_pcc[dim] = {"r": float(r), "p_value": float(p), "n": len(utts)}

    # golden pipeline run: corpus -> noisy raw -> reproducible report
    corpus_path = HERE / "mini_corpus.ndjson"
    write_corpus(corpus, corpus_path)
    raw_path = HERE / "golden_noisy_raw.ndjson"
    ops.run(
        schemas.RunRequest(
            corpus=str(corpus_path),
            split="test",
            mock=schemas.MockSpec(mode="noisy", seed=NOISY_SEED, substitution_rate=NOISY_RATE),
            tasks=["APA", "MDD"],
            concurrency=1,
            control_tokens="on",
            out=str(raw_path),
        )
    )
    score_response = ops.score(
        schemas.ScoreRequest(
            corpus=str(corpus_path),
            raw=str(raw_path),
            out=str(HERE / "golden_report.json"),
            reproducible=True,
            run_id="golden-noisy",
            strategy_label="mock-noisy",
        )
    )
    report = score_response.report
    assert report["mdd"]["per"]["value"] == float(noisy_per), "pipeline PER != oracle PER"
    corpus_path.unlink()

    ground_truth = {
        "utterances": len(utts),
        "a2_utt_id": utts[0]["utt_id"],
        "speakers": {"test": len(SPEAKERS), "train": 0},
        "files": {"test": len(utts), "train": 0},
        "gender_test": {
            "male": {"pct": 50.0, "n": 2},
            "female": {"pct": 50.0, "n": 2},
        },
        "age_test": {
            "under20": {"pct": 25.0, "n": 1},
            "twenties": {"pct": 25.0, "n": 1},
            "thirties": {"pct": 25.0, "n": 1},
            "forties": {"pct": 25.0, "n": 1},
        },
        "total_phones": total_phones,
        "mispronounced_phones": flagged_phones,
        "mispronounced_phone_rate": flagged_phones / total_phones,
        "canonical_mock": {
            "per": float(canonical_per),
            "per_errors": canonical_errors,
            "per_ref_len": canonical_ref_len,
        },
        "noisy_mock": {
            "seed": NOISY_SEED,
            "rate": NOISY_RATE,
            "per": float(noisy_per),
            "per_errors": noisy_errors,
            "per_ref_len": noisy_ref_len,
            "f1": report["mdd"]["f1"]["value"],
            "precision": report["mdd"]["precision"]["value"],
            "recall": report["mdd"]["recall"]["value"],
        },
        "stored_predictions": {
            "file": "stored_predictions.ndjson",
            "pcc": stored_pcc,
            "predicted": predicted,
        },
    }
    (HERE / "ground_truth.json").write_text(
        json.dumps(ground_truth, indent=2, sort_keys=True) + "\n", "utf-8"
    )
    print(f"mini corpus: {len(utts)} utterances, {total_phones} phones, {flagged_phones} flagged")
    print(f"canonical-mock PER {float(canonical_per):.6f}, noisy PER {float(noisy_per):.6f}")
    print(f"noisy F1 {report['mdd']['f1']['value']:.6f}")


if __name__ == "__main__":
    main()
