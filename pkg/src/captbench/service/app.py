"""FastAPI application: benchmark operations plus the capt-infer/1 mock backend.

The mock endpoint lets the HTTP client path be exercised end to end with
no model server: configure it with a corpus and a policy (at startup or
via POST /v1/mock/configure) and point `capt-bench run --backend` at it.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import inference
from ..corpus import Corpus, read_corpus
from ..errors import CaptBenchError
from . import ops, schemas


class MockRuntime:
    """Mutable holder for the corpus/policy behind /v1/evaluate."""

    def __init__(self):
        self.backend: Optional[inference.MockBackend] = None

    def configure(self, corpus: Corpus, policy: inference.MockPolicy) -> inference.MockBackend:
        self.backend = inference.MockBackend(corpus, policy)
        return self.backend


def create_app(mock: Optional[MockRuntime] = None) -> FastAPI:
    app = FastAPI(title="capt-bench", version="0.1.0")
    runtime = mock or MockRuntime()
    app.state.mock = runtime

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        issues = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        return JSONResponse(status_code=422, content={"error": issues})

    @app.exception_handler(CaptBenchError)
    async def domain_error_handler(request: Request, exc: CaptBenchError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/healthz", response_model=schemas.HealthResponse)
    def healthz():
        return schemas.HealthResponse(status="ok", mock_configured=runtime.backend is not None)

    @app.post("/v1/evaluate")
    def evaluate(req: schemas.EvaluateRequest):
        if runtime.backend is None:
            return JSONResponse(
                status_code=503, content={"error": "mock backend not configured"}
            )
        response = runtime.backend.respond(
            inference.InferenceRequest(
                utt_id=req.utt_id,
                task=req.task,
                prompt=req.prompt,
                audio_ref=req.audio_url or "",
                decode=inference.DecodeParams(req.temperature, req.max_new_tokens),
            )
        )
        if response.error is not None:
            return JSONResponse(status_code=500, content={"error": response.error})
        return {"text": response.text}

    @app.post("/v1/mock/configure", response_model=schemas.MockConfigureResponse)
    def mock_configure(req: schemas.MockConfigureRequest):
        corpus = read_corpus(req.corpus)
        kwargs = {
            "mode": req.mode,
            "seed": req.seed,
            "substitution_rate": req.substitution_rate,
        }
        if req.constant_scores is not None:
            kwargs["constant_scores"] = req.constant_scores
        backend = runtime.configure(corpus, inference.MockPolicy(**kwargs))
        return schemas.MockConfigureResponse(
            backend_id=backend.backend_id, utterances=len(corpus.utterances)
        )

    @app.post("/v1/ingest", response_model=schemas.IngestResponse)
    def ingest(req: schemas.IngestRequest):
        return ops.ingest(req)

    @app.post("/v1/build-sft", response_model=schemas.BuildSftResponse)
    def build_sft(req: schemas.BuildSftRequest):
        return ops.build_sft(req)

    @app.post("/v1/run", response_model=schemas.RunResponse)
    def run(req: schemas.RunRequest):
        return ops.run(req)

    @app.post("/v1/score", response_model=schemas.ScoreResponse)
    def score(req: schemas.ScoreRequest):
        return ops.score(req)

    @app.post("/v1/report", response_model=schemas.ReportResponse)
    def render(req: schemas.ReportRequest):
        return ops.render(req)

    @app.post("/v1/correlate", response_model=schemas.CorrelateResponse)
    def correlate(req: schemas.CorrelateRequest):
        return ops.correlate(req)

    return app
