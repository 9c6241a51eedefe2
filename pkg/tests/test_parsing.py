import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from captbench.errors import MissingKey, NoObjectFound, NonNumericValue
from captbench.inference import RawResponse
from captbench.parsing import (
    ApaScores,
    parse_all,
    parse_apa,
    parse_mdd,
    serialize_apa,
    serialize_mdd,
)
from captbench.prompts import MDD_PROMPT

A2_OBJECT = (
    "{'word_transcript': 'That's an interesting observation.', "
    "'phoneme_transcript': 'DH EH S AX N IH N T AX R EH S T IH NG AA B Z AX R V EY IH SH AX N'}"
)

scores_strategy = st.integers(min_value=0, max_value=10)


def test_parse_apa_strict_single_quotes():
    scores, repairs = parse_apa("{'accuracy': 8, 'fluency': 7, 'prosodic': 9, 'total': 8}")
    assert scores == ApaScores(8, 7, 9, 8)
    assert repairs == []


def test_parse_apa_prose_prefix_and_double_quotes():
    scores, repairs = parse_apa(
        'Sure! {"accuracy": 10, "fluency": 10, "prosodic": 10, "total": 10}'
    )
    assert scores == ApaScores(10, 10, 10, 10)
    assert repairs == ["prose-prefix-skipped"]


def test_parse_apa_missing_key():
    with pytest.raises(MissingKey) as exc:
        parse_apa("{'accuracy': 8, 'fluency': 7}")
    assert exc.value.key == "prosodic"


def test_parse_apa_no_object():
    with pytest.raises(NoObjectFound):
        parse_apa("the pronunciation was great")


def test_parse_apa_non_numeric():
    with pytest.raises(NonNumericValue):
        parse_apa("{'accuracy': high, 'fluency': 7, 'prosodic': 9, 'total': 8}")


def test_parse_apa_last_object_wins():
    text = (
        "Use this format: {'accuracy': ACCURACY_SCORE, 'fluency': F, 'prosodic': P, 'total': T}\n"
        "{'accuracy': 6, 'fluency': 5, 'prosodic': 7, 'total': 6}"
    )
    scores, repairs = parse_apa(text)
    assert scores == ApaScores(6, 5, 7, 6)
    assert "earlier-object-skipped" in repairs


def test_parse_apa_quoted_and_fractional_values():
    scores, repairs = parse_apa("{'accuracy': '8', 'fluency': 6.5, 'prosodic': 7.4, 'total': 8}")
    assert scores == ApaScores(8, 7, 7, 8)  # halves round up
    assert "quoted-number:accuracy" in repairs
    assert "rounded-value:fluency" in repairs
    assert "rounded-value:prosodic" in repairs


def test_parse_apa_ignores_extra_keys():
    scores, repairs = parse_apa(
        "{'accuracy': 8, 'completeness': 10, 'fluency': 7, 'prosodic': 9, 'total': 8}"
    )
    assert scores == ApaScores(8, 7, 9, 8)
    assert repairs == []


def test_parse_apa_clamps_out_of_range():
    scores, repairs = parse_apa("{'accuracy': 12, 'fluency': -1, 'prosodic': 9, 'total': 8}")
    assert scores.accuracy == 10
    assert scores.fluency == 0
    assert "clamped:accuracy" in repairs
    assert "clamped:fluency" in repairs


def test_parse_mdd_reference_example(inventory):
    payload, repairs = parse_mdd(A2_OBJECT, inventory)
    assert payload.word_transcript == "That's an interesting observation."
    assert len(payload.phoneme_transcript) == 26
    assert repairs == []


def test_parse_mdd_prompt_example_is_extractable(inventory):
    # the instruction block itself ends with a well-formed example object
    payload, _repairs = parse_mdd(MDD_PROMPT, inventory)
    assert payload.word_transcript == "That's an interesting observation."


def test_parse_mdd_unknown_phone_becomes_unk(inventory):
    payload, repairs = parse_mdd(
        "{'word_transcript': 'a cat', 'phoneme_transcript': 'K AE ZZZ'}", inventory
    )
    assert payload.phoneme_transcript.symbols == ["K", "AE", "<unk>"]
    assert "unknown-phone:ZZZ" in repairs


def test_parse_mdd_strips_stress_with_repair(inventory):
    payload, repairs = parse_mdd(
        "{'word_transcript': 'a', 'phoneme_transcript': 'AA1 B'}", inventory
    )
    assert payload.phoneme_transcript.symbols == ["AA", "B"]
    assert "stress-stripped:AA1" in repairs


def test_parse_mdd_empty_string(inventory):
    with pytest.raises(NoObjectFound):
        parse_mdd("", inventory)


def test_parse_mdd_missing_key(inventory):
    with pytest.raises(MissingKey):
        parse_mdd("{'word_transcript': 'hello there'}", inventory)


def test_parse_mdd_preserves_raw_text(inventory):
    payload, _ = parse_mdd(
        "{'word_transcript': 'x', 'phoneme_transcript': 'K AE1 QQ'}", inventory
    )
    assert payload.raw_phoneme_text == "K AE1 QQ"


@given(
    accuracy=scores_strategy, fluency=scores_strategy, prosodic=scores_strategy, total=scores_strategy
)
def test_apa_round_trip_zero_repairs(accuracy, fluency, prosodic, total):
    scores = ApaScores(accuracy, fluency, prosodic, total)
    parsed, repairs = parse_apa(serialize_apa(scores))
    assert parsed == scores
    assert repairs == []


def test_apa_round_trip_exhaustive_all_score_combinations():
    import itertools

    for combo in itertools.product(range(11), repeat=4):
        scores = ApaScores(*combo)
        parsed, repairs = parse_apa(serialize_apa(scores))
        assert parsed == scores and repairs == []


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_mdd_round_trip_zero_repairs(inventory, data):
    symbols = data.draw(st.lists(st.sampled_from(inventory.symbols), max_size=30))
    words = data.draw(
        st.lists(
            st.text(alphabet="abcdefg'", min_size=1, max_size=8).filter(lambda w: w.strip("'")),
            min_size=1,
            max_size=6,
        )
    )
    word_text = " ".join(words)
    payload, repairs = parse_mdd(serialize_mdd(word_text, " ".join(symbols)), inventory)
    assert repairs == []
    assert payload.word_transcript == word_text
    assert payload.phoneme_transcript.symbols == symbols


def _raw(utt_id, task, text, error=None):
    return RawResponse(utt_id, task, text, 0, "test", error)


def test_parse_all_mixed(inventory):
    raws = [
        _raw("u1", "APA", serialize_apa(ApaScores(8, 7, 9, 8))),
        _raw("u1", "MDD", A2_OBJECT),
        _raw("u2", "APA", "garbage with no payload"),
        _raw("u3", "MDD", "", error="HTTP 500: boom"),
    ]
    outcomes, summary = parse_all(raws, inventory)
    assert [o.ok for o in outcomes] == [True, True, False, False]
    assert summary["total"] == 4
    assert summary["parsed"] == 2
    assert summary["failed"] == 2
    assert summary["by_task"]["APA"]["failed"] == 1
    assert outcomes[3].error.startswith("backend error")


def test_parse_all_idempotent(inventory):
    raws = [
        _raw("u1", "APA", serialize_apa(ApaScores(1, 2, 3, 4))),
        _raw("u1", "MDD", A2_OBJECT),
    ]
    first, _ = parse_all(raws, inventory)
    second, _ = parse_all(raws, inventory)
    assert first == second


def test_parsed_outcome_file_round_trip(inventory, tmp_path):
    from captbench.parsing import read_parsed, write_parsed

    raws = [
        _raw("u1", "APA", serialize_apa(ApaScores(8, 7, 9, 8))),
        _raw("u1", "MDD", A2_OBJECT),
        _raw("u2", "APA", "garbage"),
    ]
    outcomes, summary = parse_all(raws, inventory)
    path = tmp_path / "parsed.ndjson"
    write_parsed(outcomes, summary, path)
    records, header = read_parsed(path)
    assert header["schema"] == "capt-parsed/1"
    assert header["summary"]["failed"] == 1
    assert len(records) == 3
    assert records[0]["payload"] == {"accuracy": 8, "fluency": 7, "prosodic": 9, "total": 8}
    assert records[1]["payload"]["word_transcript"] == "That's an interesting observation."
    assert records[2]["ok"] is False and records[2]["payload"] is None
    assert records[2]["error"]
