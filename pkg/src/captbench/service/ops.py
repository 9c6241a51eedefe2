"""Service operations: the single implementation behind routes and CLI.

Each operation takes a request model and returns a response model; the
FastAPI routes and the command-line client are both thin wrappers over
these functions, so file-format and metric behavior cannot drift between
the two entry points.
"""

from __future__ import annotations

from .. import inference, prompts, report as report_mod, speechocean762
from ..corpus import read_corpus, write_corpus
from ..errors import CaptBenchError
from ..phones import load_inventory
from . import schemas


def ingest(req: schemas.IngestRequest) -> schemas.IngestResponse:
    inventory = load_inventory(req.inventory)
    result = speechocean762.ingest(
        req.source,
        inventory,
        speechocean762.IngestOptions(
            lenient=req.lenient, phone_acc_threshold=req.phone_acc_threshold
        ),
    )
    write_corpus(result.corpus, req.out)
    counts = result.counts
    return schemas.IngestResponse(
        out=req.out,
        utterances=len(result.corpus.utterances),
        train=schemas.SplitCount(**counts["train"]),
        test=schemas.SplitCount(**counts["test"]),
        errors=result.errors,
    )


def build_sft(req: schemas.BuildSftRequest) -> schemas.BuildSftResponse:
    corpus = read_corpus(req.corpus)
    pairs = prompts.build_sft(corpus, req.split, use_control_token=req.control_tokens == "on")
    prompts.write_sft(pairs, req.out, req.audio_token)
    return schemas.BuildSftResponse(out=req.out, pairs=len(pairs))


def _mock_policy(spec: schemas.MockSpec) -> inference.MockPolicy:
    kwargs = {"mode": spec.mode, "seed": spec.seed, "substitution_rate": spec.substitution_rate}
    if spec.constant_scores is not None:
        kwargs["constant_scores"] = spec.constant_scores
    return inference.MockPolicy(**kwargs)


def run(req: schemas.RunRequest) -> schemas.RunResponse:
    if (req.backend is None) == (req.mock is None):
        raise CaptBenchError("exactly one of backend URL or mock policy must be given")
    corpus = read_corpus(req.corpus)
    if req.mock is not None:
        backend = inference.MockBackend(corpus, _mock_policy(req.mock))
    else:
        backend = inference.HttpBackend(req.backend)
    decode = inference.DecodeParams(
        temperature=req.temperature, max_new_tokens=req.max_new_tokens
    )
    responses = inference.run_eval(
        corpus,
        backend,
        tasks=req.tasks,
        concurrency=req.concurrency,
        split=req.split,
        use_control_tokens=req.control_tokens == "on",
        decode=decode,
    )
    inference.write_raw(
        responses,
        req.out,
        backend_id=backend.backend_id,
        tasks=req.tasks,
        control_tokens=req.control_tokens == "on",
        decode=decode,
    )
    return schemas.RunResponse(
        out=req.out,
        responses=len(responses),
        errors=sum(1 for r in responses if r.error is not None),
        backend_id=backend.backend_id,
    )


def score(req: schemas.ScoreRequest) -> schemas.ScoreResponse:
    corpus = read_corpus(req.corpus)
    responses, header = inference.read_raw(req.raw)
    config = report_mod.ScoreConfig(
        per_reference=req.per_reference,
        wer_normalize=req.wer_normalize,
        reproducible=req.reproducible,
        run_id=req.run_id,
        strategy_label=req.strategy_label,
    )
    result = report_mod.score(corpus, responses, header, config)
    report_mod.write_report(result, req.out)
    if req.parsed_out:
        from ..parsing import parse_all, write_parsed

        outcomes, summary = parse_all(responses, corpus.inventory)
        write_parsed(outcomes, summary, req.parsed_out)
    return schemas.ScoreResponse(out=req.out, report=result, skipped=result["skipped"])


def render(req: schemas.ReportRequest) -> schemas.ReportResponse:
    reports = [report_mod.read_report(path) for path in req.inputs]
    return schemas.ReportResponse(document=report_mod.render_table(reports, req.format))


def correlate(req: schemas.CorrelateRequest) -> schemas.CorrelateResponse:
    loaded = report_mod.read_report(req.report)
    files = report_mod.export_scatter(loaded, req.out_dir)
    warning = None if files else "report has no correlation study; nothing exported"
    return schemas.CorrelateResponse(files=[str(p) for p in files], warning=warning)
