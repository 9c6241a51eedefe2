"""Shared conformance fixtures for the capt-infer/1 wire contract.

Any backend implementing POST /v1/evaluate (the bundled mock service or an
external serving shim) must handle these cases schema-identically:
200 responses carry {"text": <string>}, validation failures return 422
with {"error": <string>}, and GET /healthz answers 200 with a "status"
key. The fixture file is replayed by this package's service tests and by
backend implementations in other languages.
"""

from __future__ import annotations

import json
from pathlib import Path

CONTRACT_SCHEMA = "capt-infer-fixtures/1"

# utt_id values match the bundled mini corpus so the mock backend can
# resolve them; shims that ignore utt_id are unaffected.
_VALID_APA = {
    "utt_id": "000010001",
    "task": "APA",
    "prompt": "<|APA|>\nRate the pronunciation of the audio.",
    "audio_url": "WAVE/SPEAKER0001/000010001.WAV",
    "temperature": 0.0,
    "max_new_tokens": 512,
}

_VALID_MDD = {
    "utt_id": "000010001",
    "task": "MDD",
    "prompt": "<|MDD|>\nTranscribe the audio utterance.",
    "audio_url": "WAVE/SPEAKER0001/000010001.WAV",
    "temperature": 0.0,
    "max_new_tokens": 512,
}


def contract_fixtures() -> dict:
    def case(name, body, status, required_key, value_type):
        return {
            "name": name,
            "request": {"method": "POST", "path": "/v1/evaluate", "body": body},
            "expect": {"status": status, "required_key": required_key, "value_type": value_type},
        }

    minimal = {k: _VALID_MDD[k] for k in ("utt_id", "task", "prompt", "audio_url")}
    cases = [
        case("apa-request-ok", dict(_VALID_APA), 200, "text", "string"),
        case("mdd-request-ok", dict(_VALID_MDD), 200, "text", "string"),
        case("decode-defaults-applied", minimal, 200, "text", "string"),
        case("missing-prompt", {k: v for k, v in _VALID_APA.items() if k != "prompt"}, 422, "error", "string"),
        case("empty-prompt", {**_VALID_APA, "prompt": ""}, 422, "error", "string"),
        case("bad-task", {**_VALID_APA, "task": "ASR"}, 422, "error", "string"),
        case("negative-temperature", {**_VALID_APA, "temperature": -1.0}, 422, "error", "string"),
        case("zero-max-new-tokens", {**_VALID_APA, "max_new_tokens": 0}, 422, "error", "string"),
        {
            "name": "healthz",
            "request": {"method": "GET", "path": "/healthz", "body": None},
            "expect": {"status": 200, "required_key": "status", "value_type": "string"},
        },
    ]
    return {"schema": CONTRACT_SCHEMA, "cases": cases}


def write_contract_fixtures(path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(contract_fixtures(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        "utf-8",
    )


def check_case(case: dict, status_code: int, payload: dict) -> list[str]:
    """Problems found when a backend's response is held against one case."""
    problems = []
    expect = case["expect"]
    if status_code != expect["status"]:
        problems.append(f"{case['name']}: expected status {expect['status']}, got {status_code}")
    key = expect["required_key"]
    if key not in payload:
        problems.append(f"{case['name']}: response body lacks key {key!r}")
    elif expect["value_type"] == "string" and not isinstance(payload[key], str):
        problems.append(f"{case['name']}: value for {key!r} is not a string")
    return problems
