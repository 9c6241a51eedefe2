"""Pydantic request/response models for the benchmark service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"
    mock_configured: bool = False


class EvaluateRequest(BaseModel):
    """capt-infer/1 request body."""

    utt_id: str
    task: Literal["APA", "MDD"]
    prompt: str = Field(min_length=1)
    audio_b64: Optional[str] = None
    audio_url: Optional[str] = None
    temperature: float = Field(default=0.0, ge=0.0)
    max_new_tokens: int = Field(default=512, gt=0)


class EvaluateResponse(BaseModel):
    text: str


class ErrorResponse(BaseModel):
    error: str


class MockConfigureRequest(BaseModel):
    corpus: str
    mode: Literal["oracle", "canonical", "noisy", "constant"] = "oracle"
    seed: int = 0
    substitution_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    constant_scores: Optional[dict[str, int]] = None


class MockConfigureResponse(BaseModel):
    backend_id: str
    utterances: int


class IngestRequest(BaseModel):
    source: str
    adapter: Literal["speechocean762"] = "speechocean762"
    inventory: Optional[str] = None
    out: str
    lenient: bool = False
    phone_acc_threshold: float = 0.5


class SplitCount(BaseModel):
    files: int
    speakers: int


class IngestResponse(BaseModel):
    out: str
    utterances: int
    train: SplitCount
    test: SplitCount
    errors: list[str] = []


class BuildSftRequest(BaseModel):
    corpus: str
    split: Literal["train", "test"] = "train"
    control_tokens: Literal["on", "off"] = "on"
    audio_token: str = Field(default="<|audio_1|>", min_length=1)
    out: str


class BuildSftResponse(BaseModel):
    out: str
    pairs: int


class MockSpec(BaseModel):
    mode: Literal["oracle", "canonical", "noisy", "constant"]
    seed: int = 0
    substitution_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    constant_scores: Optional[dict[str, int]] = None


class RunRequest(BaseModel):
    corpus: str
    split: Literal["train", "test"] = "test"
    backend: Optional[str] = None
    mock: Optional[MockSpec] = None
    tasks: list[Literal["APA", "MDD"]] = ["APA", "MDD"]
    concurrency: int = Field(default=1, ge=1)
    control_tokens: Literal["on", "off"] = "on"
    temperature: float = Field(default=0.0, ge=0.0)
    max_new_tokens: int = Field(default=512, gt=0)
    out: str


class RunResponse(BaseModel):
    out: str
    responses: int
    errors: int
    backend_id: str


class ScoreRequest(BaseModel):
    corpus: str
    raw: str
    out: str
    parsed_out: Optional[str] = None
    per_reference: Literal["perceived", "canonical"] = "perceived"
    wer_normalize: bool = True
    reproducible: bool = False
    run_id: Optional[str] = None
    strategy_label: str = "unlabeled"


class ScoreResponse(BaseModel):
    out: str
    report: dict
    skipped: list[dict]


class ReportRequest(BaseModel):
    inputs: list[str] = Field(min_length=1)
    format: Literal["text", "csv", "markdown"] = "text"


class ReportResponse(BaseModel):
    document: str


class CorrelateRequest(BaseModel):
    report: str
    out_dir: str


class CorrelateResponse(BaseModel):
    files: list[str]
    warning: Optional[str] = None
