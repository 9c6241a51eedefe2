"""Drives a chat-style inference endpoint (or a built-in mock) over a corpus.

Mock backends exist so every downstream metric can be exercised without a
GPU model: `oracle` answers with the ground truth, `canonical` transcribes
the canonical phones (a model that never hears mistakes), `noisy` corrupts
the oracle with seeded per-phone substitutions, and `constant` always gives
the same scores. Mocks are pure functions of (policy, utterance), so runs
are reproducible byte for byte.
"""

from __future__ import annotations

import base64
import json
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional

import httpx

from .corpus import Corpus, Utterance
from .errors import BackendUnreachable, CaptBenchError, SchemaMismatch
from .parsing import ApaScores, serialize_apa, serialize_mdd
from .phones import UNK, PhoneInventory
from .prompts import APA, TASKS, build_prompt

RAW_SCHEMA = "capt-raw/1"

MOCK_MODES = ("oracle", "canonical", "noisy", "constant")

DEFAULT_CONSTANT_SCORES = {"accuracy": 8, "fluency": 8, "prosodic": 8, "total": 8}


@dataclass(frozen=True)
class DecodeParams:
    temperature: float = 0.0
    max_new_tokens: int = 512

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_new_tokens <= 0:
            raise ValueError("max_new_tokens must be positive")


@dataclass(frozen=True)
class InferenceRequest:
    utt_id: str
    task: str
    prompt: str
    audio_ref: str
    decode: DecodeParams = DecodeParams()

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be nonempty")


@dataclass(frozen=True)
class RawResponse:
    utt_id: str
    task: str
    text: str
    latency_ms: int
    backend_id: str
    error: Optional[str] = None


@dataclass(frozen=True)
class MockPolicy:
    mode: str
    seed: int = 0
    substitution_rate: float = 0.0
    constant_scores: Mapping[str, int] = field(
        default_factory=lambda: dict(DEFAULT_CONSTANT_SCORES)
    )

    def __post_init__(self):
        if self.mode not in MOCK_MODES:
            raise ValueError(f"unknown mock mode {self.mode!r}")
        if not 0.0 <= self.substitution_rate <= 1.0:
            raise ValueError("substitution_rate must be in [0, 1]")

    @property
    def backend_id(self) -> str:
        if self.mode == "noisy":
            return f"mock:noisy:seed={self.seed}:rate={self.substitution_rate}"
        return f"mock:{self.mode}"


def mock_respond(utt: Utterance, task: str, policy: MockPolicy, inventory: PhoneInventory) -> str:
    """Deterministic mock answer for one (utterance, task).

    The noisy generator is keyed on (seed, utt_id, task) so outputs are
    stable regardless of request order or concurrency.
    """
    if task == APA:
        if policy.mode == "constant":
            scores = ApaScores(**{k: int(policy.constant_scores[k]) for k in
                                  ("accuracy", "fluency", "prosodic", "total")})
        elif policy.mode == "noisy":
            rng = random.Random(f"{policy.seed}:{utt.utt_id}:{task}")
            jittered = {}
            for dim in ("accuracy", "fluency", "prosodic", "total"):
                value = getattr(utt.scores, dim)
                if rng.random() < policy.substitution_rate:
                    value = min(10, max(0, value + rng.choice((-1, 1))))
                jittered[dim] = value
            scores = ApaScores(**jittered)
        else:
            scores = ApaScores(
                utt.scores.accuracy, utt.scores.fluency, utt.scores.prosodic, utt.scores.total
            )
        return serialize_apa(scores)

    if policy.mode in ("canonical", "constant"):
        phones = utt.canonical_phones.render()
    elif policy.mode == "noisy":
        rng = random.Random(f"{policy.seed}:{utt.utt_id}:{task}")
        symbols = []
        candidates = [s for s in sorted(inventory.symbols) if s != UNK]
        for phone in utt.perceived_phones:
            symbol = phone.symbol
            if rng.random() < policy.substitution_rate:
                others = [c for c in candidates if c != symbol]
                symbol = rng.choice(others)
            symbols.append(symbol)
        phones = " ".join(symbols)
    else:
        phones = utt.perceived_phones.render()
    return serialize_mdd(utt.word_text, phones)


class MockBackend:
    """In-process backend over a loaded corpus.

    Tracks the number of requests simultaneously in flight so tests can
    observe that run_eval honors its concurrency bound.
    """

    def __init__(self, corpus: Corpus, policy: MockPolicy):
        self._by_id = corpus.by_id()
        self._inventory = corpus.inventory
        self.policy = policy
        self.backend_id = policy.backend_id
        self._lock = threading.Lock()
        self._in_flight = 0
        self.max_in_flight = 0

    def respond(self, request: InferenceRequest) -> RawResponse:
        with self._lock:
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)
        try:
            utt = self._by_id.get(request.utt_id)
            if utt is None:
                return RawResponse(
                    request.utt_id, request.task, "", 0, self.backend_id,
                    error=f"unknown utterance {request.utt_id!r}",
                )
            text = mock_respond(utt, request.task, self.policy, self._inventory)
            return RawResponse(request.utt_id, request.task, text, 0, self.backend_id)
        finally:
            with self._lock:
                self._in_flight -= 1


class HttpBackend:
    """Client for the capt-infer/1 contract (POST /v1/evaluate).

    Connection failures and 5xx responses are retried with exponential
    backoff; 4xx responses are permanent and recorded as errors.
    """

    def __init__(
        self,
        base_url: str,
        *,
        max_retries: int = 3,
        backoff_s: float = 0.5,
        client: Optional[httpx.Client] = None,
        send_audio_b64: bool = True,
    ):
        self.base_url = base_url.rstrip("/")
        self.backend_id = self.base_url
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self.send_audio_b64 = send_audio_b64
        self._client = client or httpx.Client(timeout=60.0)

    def check_reachable(self) -> None:
        try:
            response = self._client.get(f"{self.base_url}/healthz")
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise BackendUnreachable(self.base_url, str(exc)) from exc

    def _body(self, request: InferenceRequest) -> dict:
        body = {
            "utt_id": request.utt_id,
            "task": request.task,
            "prompt": request.prompt,
            "temperature": request.decode.temperature,
            "max_new_tokens": request.decode.max_new_tokens,
        }
        audio_path = Path(request.audio_ref)
        if self.send_audio_b64 and audio_path.is_file():
            body["audio_b64"] = base64.b64encode(audio_path.read_bytes()).decode("ascii")
        else:
            body["audio_url"] = request.audio_ref
        return body

    def respond(self, request: InferenceRequest) -> RawResponse:
        body = self._body(request)
        start = time.monotonic()
        error = "no attempt made"
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_s * (2 ** (attempt - 1)))
            try:
                response = self._client.post(f"{self.base_url}/v1/evaluate", json=body)
            except httpx.HTTPError as exc:
                error = f"transport error: {exc}"
                continue
            latency = int((time.monotonic() - start) * 1000)
            if response.status_code == 200:
                payload = response.json()
                if "text" in payload:
                    return RawResponse(
                        request.utt_id, request.task, payload["text"], latency, self.backend_id
                    )
                error = payload.get("error", "response carried neither text nor error")
                break
            detail = _response_error(response)
            error = f"HTTP {response.status_code}: {detail}"
            if response.status_code < 500:
                break
        latency = int((time.monotonic() - start) * 1000)
        return RawResponse(request.utt_id, request.task, "", latency, self.backend_id, error=error)


def _response_error(response: httpx.Response) -> str:
    try:
        payload = response.json()
    except ValueError:
        return response.text[:200]
    if isinstance(payload, dict):
        return str(payload.get("error") or payload.get("detail") or payload)[:200]
    return str(payload)[:200]


def run_eval(
    corpus: Corpus,
    backend,
    *,
    tasks: Iterable[str] = TASKS,
    concurrency: int = 1,
    split: Optional[str] = "test",
    use_control_tokens: bool = True,
    decode: DecodeParams = DecodeParams(),
) -> list[RawResponse]:
    """One response per (utterance, task), ordered by (utt_id, task).

    Ordering is restored after completion, so results do not depend on the
    concurrency level.
    """
    if concurrency < 1:
        raise ValueError("concurrency must be >= 1")
    task_list = [t for t in TASKS if t in set(tasks)]
    if not task_list:
        raise ValueError("no tasks selected")
    utts = corpus.utterances if split is None else tuple(corpus.split(split))
    if not utts:
        raise CaptBenchError(f"no utterances in split {split!r}")

    if isinstance(backend, HttpBackend):
        backend.check_reachable()

    requests = [
        InferenceRequest(
            utt_id=utt.utt_id,
            task=task,
            prompt=build_prompt(task, use_control_tokens),
            audio_ref=utt.audio_ref,
            decode=decode,
        )
        for utt in utts
        for task in task_list
    ]

    if concurrency == 1:
        responses = [backend.respond(req) for req in requests]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            responses = list(pool.map(backend.respond, requests))
    responses.sort(key=lambda r: (r.utt_id, r.task))
    return responses


def write_raw(
    responses: list[RawResponse],
    path: str | Path,
    *,
    backend_id: str,
    tasks: Iterable[str],
    control_tokens: bool,
    decode: DecodeParams = DecodeParams(),
) -> None:
    path = Path(path)
    header = {
        "schema": RAW_SCHEMA,
        "backend_id": backend_id,
        "tasks": sorted(set(tasks)),
        "control_tokens": "on" if control_tokens else "off",
        "decode": {"temperature": decode.temperature, "max_new_tokens": decode.max_new_tokens},
    }
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for r in responses:
            record = {
                "utt_id": r.utt_id,
                "task": r.task,
                "text": r.text,
                "latency_ms": r.latency_ms,
                "backend_id": r.backend_id,
                "error": r.error,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_raw(path: str | Path) -> tuple[list[RawResponse], dict]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("schema") != RAW_SCHEMA:
            raise SchemaMismatch("schema", str(path), f"expected {RAW_SCHEMA}")
        responses = []
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            responses.append(
                RawResponse(
                    record["utt_id"],
                    record["task"],
                    record["text"],
                    record["latency_ms"],
                    record["backend_id"],
                    record.get("error"),
                )
            )
    return responses, header
