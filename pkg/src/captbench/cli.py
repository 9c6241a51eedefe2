"""capt-bench command line.

Every subcommand builds the same request model the HTTP service accepts
and either executes it in-process (default) or posts it to a running
service (--server URL). Exit codes: 0 success, 2 partial (a metric was
skipped), 1 fatal.
"""

from __future__ import annotations

import sys

import click
import httpx
from pydantic import BaseModel

from .contract import write_contract_fixtures
from .errors import CaptBenchError
from .service import ops, schemas

_SERVER_PATHS = {
    schemas.IngestRequest: "/v1/ingest",
    schemas.BuildSftRequest: "/v1/build-sft",
    schemas.RunRequest: "/v1/run",
    schemas.ScoreRequest: "/v1/score",
    schemas.ReportRequest: "/v1/report",
    schemas.CorrelateRequest: "/v1/correlate",
}

_LOCAL_OPS = {
    schemas.IngestRequest: ops.ingest,
    schemas.BuildSftRequest: ops.build_sft,
    schemas.RunRequest: ops.run,
    schemas.ScoreRequest: ops.score,
    schemas.ReportRequest: ops.render,
    schemas.CorrelateRequest: ops.correlate,
}


def _execute(request: BaseModel, response_model, server: str | None):
    if server is None:
        return _LOCAL_OPS[type(request)](request)
    url = server.rstrip("/") + _SERVER_PATHS[type(request)]
    reply = httpx.post(url, json=request.model_dump(), timeout=600.0)
    if reply.status_code != 200:
        detail = reply.json().get("error", reply.text) if reply.content else reply.text
        raise CaptBenchError(f"server returned HTTP {reply.status_code}: {detail}")
    return response_model.model_validate(reply.json())


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


server_option = click.option("--server", default=None, help="Base URL of a running capt-bench service.")


@click.group()
def main():
    """Benchmark harness for joint pronunciation assessment and mispronunciation detection."""


@main.command()
@click.option("--source", required=True, type=click.Path())
@click.option("--adapter", default="speechocean762", show_default=True)
@click.option("--inventory", default=None, type=click.Path(), help="Phone inventory file (default: bundled 46-unit set).")
@click.option("--out", required=True, type=click.Path())
@click.option("--lenient", is_flag=True, help="Skip bad records instead of failing.")
@click.option("--phone-acc-threshold", default=0.5, show_default=True)
@server_option
def ingest(source, adapter, inventory, out, lenient, phone_acc_threshold, server):
    """Read a corpus source tree into the canonical corpus file."""
    request = schemas.IngestRequest(
        source=source,
        adapter=adapter,
        inventory=inventory,
        out=out,
        lenient=lenient,
        phone_acc_threshold=phone_acc_threshold,
    )
    try:
        response = _execute(request, schemas.IngestResponse, server)
    except CaptBenchError as exc:
        _fail(str(exc))
    click.echo(
        f"ingested {response.utterances} utterances -> {response.out} "
        f"(train {response.train.files}/{response.train.speakers} spk, "
        f"test {response.test.files}/{response.test.speakers} spk)"
    )
    for err in response.errors:
        click.echo(f"skipped: {err}", err=True)


@main.command("build-sft")
@click.option("--corpus", required=True, type=click.Path())
@click.option("--split", default="train", type=click.Choice(["train", "test"]), show_default=True)
@click.option("--control-tokens", default="on", type=click.Choice(["on", "off"]), show_default=True)
@click.option("--audio-token", default="<|audio_1|>", show_default=True)
@click.option("--out", required=True, type=click.Path())
@server_option
def build_sft(corpus, split, control_tokens, audio_token, out, server):
    """Emit supervised fine-tuning pairs for both tasks."""
    request = schemas.BuildSftRequest(
        corpus=corpus, split=split, control_tokens=control_tokens, audio_token=audio_token, out=out
    )
    try:
        response = _execute(request, schemas.BuildSftResponse, server)
    except CaptBenchError as exc:
        _fail(str(exc))
    click.echo(f"wrote {response.pairs} pairs -> {response.out}")


@main.command()
@click.option("--corpus", required=True, type=click.Path())
@click.option("--split", default="test", type=click.Choice(["train", "test"]), show_default=True)
@click.option("--backend", default=None, help="Base URL of a capt-infer/1 endpoint.")
@click.option("--mock", default=None, type=click.Choice(["oracle", "canonical", "noisy", "constant"]))
@click.option("--seed", default=0, show_default=True)
@click.option("--sub-rate", default=0.0, show_default=True)
@click.option("--tasks", default="apa,mdd", show_default=True)
@click.option("--concurrency", default=1, show_default=True)
@click.option("--control-tokens", default="on", type=click.Choice(["on", "off"]), show_default=True)
@click.option("--out", required=True, type=click.Path())
@server_option
def run(corpus, split, backend, mock, seed, sub_rate, tasks, concurrency, control_tokens, out, server):
    """Collect one raw response per (utterance, task)."""
    task_list = [t.strip().upper() for t in tasks.split(",") if t.strip()]
    mock_spec = None
    if mock is not None:
        mock_spec = schemas.MockSpec(mode=mock, seed=seed, substitution_rate=sub_rate)
    try:
        request = schemas.RunRequest(
            corpus=corpus,
            split=split,
            backend=backend,
            mock=mock_spec,
            tasks=task_list,
            concurrency=concurrency,
            control_tokens=control_tokens,
            out=out,
        )
        response = _execute(request, schemas.RunResponse, server)
    except CaptBenchError as exc:
        _fail(str(exc))
    click.echo(
        f"{response.responses} responses from {response.backend_id} -> {response.out} "
        f"({response.errors} errors)"
    )


@main.command()
@click.option("--corpus", required=True, type=click.Path())
@click.option("--raw", required=True, type=click.Path())
@click.option("--out", required=True, type=click.Path())
@click.option("--parsed-out", default=None, type=click.Path(), help="Also write the parsed-outcome file (capt-parsed/1).")
@click.option("--per-reference", default="perceived", type=click.Choice(["perceived", "canonical"]), show_default=True)
@click.option("--wer-normalize/--no-wer-normalize", default=True, show_default=True)
@click.option("--reproducible", is_flag=True, help="Fixed timestamp and digest-derived run id.")
@click.option("--run-id", default=None)
@click.option("--strategy-label", default="unlabeled", show_default=True)
@server_option
def score(corpus, raw, out, parsed_out, per_reference, wer_normalize, reproducible, run_id, strategy_label, server):
    """Compute the full metric suite into a report file."""
    request = schemas.ScoreRequest(
        corpus=corpus,
        raw=raw,
        out=out,
        parsed_out=parsed_out,
        per_reference=per_reference,
        wer_normalize=wer_normalize,
        reproducible=reproducible,
        run_id=run_id,
        strategy_label=strategy_label,
    )
    try:
        response = _execute(request, schemas.ScoreResponse, server)
    except CaptBenchError as exc:
        _fail(str(exc))
    mdd = response.report.get("mdd") or {}
    apa = response.report.get("apa") or {}

    def _fmt(section, key):
        entry = section.get(key) or {}
        value = entry.get("value") if "value" in entry else entry.get("r")
        return "n/a" if value is None else f"{value:.4f}"

    click.echo(
        f"report -> {response.out}: WER {_fmt(mdd, 'wer')}, PER {_fmt(mdd, 'per')}, "
        f"F1 {_fmt(mdd, 'f1')}, accuracy PCC {_fmt(apa, 'accuracy')}"
    )
    if response.skipped:
        for item in response.skipped:
            click.echo(f"skipped metric {item['metric']}: {item['reason']}", err=True)
        sys.exit(2)


@main.command()
@click.option("--in", "inputs", required=True, help="Comma-separated report files.")
@click.option("--format", "fmt", default="text", type=click.Choice(["text", "csv", "markdown"]), show_default=True)
@server_option
def report(inputs, fmt, server):
    """Render one table row per report."""
    request = schemas.ReportRequest(inputs=[p.strip() for p in inputs.split(",") if p.strip()], format=fmt)
    try:
        response = _execute(request, schemas.ReportResponse, server)
    except CaptBenchError as exc:
        _fail(str(exc))
    click.echo(response.document, nl=False)


@main.command()
@click.option("--in", "report_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@server_option
def correlate(report_path, out_dir, server):
    """Export accuracy-vs-PER scatter data from a report."""
    request = schemas.CorrelateRequest(report=report_path, out_dir=out_dir)
    try:
        response = _execute(request, schemas.CorrelateResponse, server)
    except CaptBenchError as exc:
        _fail(str(exc))
    for path in response.files:
        click.echo(f"wrote {path}")
    if response.warning:
        click.echo(f"warning: {response.warning}", err=True)
        sys.exit(2)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
@click.option("--mock-corpus", default=None, type=click.Path(), help="Corpus file backing /v1/evaluate.")
@click.option("--mock-policy", default="oracle", type=click.Choice(["oracle", "canonical", "noisy", "constant"]), show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--sub-rate", default=0.0, show_default=True)
def serve(host, port, mock_corpus, mock_policy, seed, sub_rate):
    """Run the benchmark service (and mock inference backend)."""
    import uvicorn

    from . import inference
    from .corpus import read_corpus
    from .service import MockRuntime, create_app

    runtime = MockRuntime()
    if mock_corpus is not None:
        runtime.configure(
            read_corpus(mock_corpus),
            inference.MockPolicy(mode=mock_policy, seed=seed, substitution_rate=sub_rate),
        )
    uvicorn.run(create_app(runtime), host=host, port=port)


@main.command("contract-fixtures")
@click.option("--out", required=True, type=click.Path())
def contract_fixtures_cmd(out):
    """Write the shared capt-infer/1 conformance fixtures."""
    write_contract_fixtures(out)
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
