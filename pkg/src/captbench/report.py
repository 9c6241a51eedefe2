"""Aggregates one evaluation run into a versioned, self-describing report.

The report file is the single source of truth: tables and plot data are
rendered from its serialized fields with no further arithmetic, so any
number a reviewer sees can be traced back to the JSON.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .align import align, normalize_words
from .corpus import Corpus
from .errors import CaptBenchError, NoScorableUtterances, SchemaMismatch, TooFewSamples
from .mdd import UtteranceMdd, corpus_mdd, pooled_per, score_utterance
from .parsing import ApaScores, MddTranscripts, parse_all
from .stats import (
    APA_DIMENSIONS,
    CorrelationResult,
    ScatterPoint,
    accuracy_per_correlation,
    apa_pcc_table,
)

logger = logging.getLogger(__name__)

REPORT_SCHEMA = "capt-report/1"
EPOCH_TIMESTAMP = "1970-01-01T00:00:00+00:00"

TABLE_COLUMNS = (
    "Strategy",
    "Run",
    "Accuracy",
    "Fluency",
    "Prosodic",
    "Total",
    "WER",
    "PER",
    "F1-score",
    "Precision",
    "Recall",
)

NOT_SIGNIFICANT_MARKER = "*"
SIGNIFICANCE_LEVEL = 0.05


@dataclass(frozen=True)
class ScoreConfig:
    per_reference: str = "perceived"  # or "canonical"
    wer_normalize: bool = True
    reproducible: bool = False
    run_id: Optional[str] = None
    strategy_label: str = "unlabeled"

    def digest(self) -> str:
        payload = json.dumps(
            {
                "schema": REPORT_SCHEMA,
                "per_reference": self.per_reference,
                "wer_normalize": self.wer_normalize,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _correlation_dict(result: CorrelationResult) -> dict:
    return result.as_dict()


def score(corpus: Corpus, responses, raw_header: dict, config: ScoreConfig = ScoreConfig()) -> dict:
    """Parse raw responses and compute the full metric suite.

    Metrics that cannot be computed (too few samples, nothing scorable) are
    recorded under "skipped" rather than aborting the run.
    """
    by_id = corpus.by_id()
    for response in responses:
        if response.utt_id not in by_id:
            raise SchemaMismatch("utt_id", response.utt_id, "raw response for unknown utterance")

    outcomes, parse_summary = parse_all(responses, corpus.inventory)
    apa_by_utt: dict[str, ApaScores] = {}
    mdd_by_utt: dict[str, MddTranscripts] = {}
    for outcome in outcomes:
        if not outcome.ok:
            continue
        if outcome.task == "APA":
            apa_by_utt[outcome.utt_id] = outcome.payload
        else:
            mdd_by_utt[outcome.utt_id] = outcome.payload

    skipped: list[dict] = []

    # WER over word transcripts, PER and detection over phoneme transcripts
    wer_errors = wer_ref_len = 0
    rows: list[UtteranceMdd] = []
    for utt_id in sorted(mdd_by_utt):
        utt = by_id[utt_id]
        payload = mdd_by_utt[utt_id]
        if config.wer_normalize:
            ref_words = normalize_words(utt.word_text)
            hyp_words = normalize_words(payload.word_transcript)
        else:
            ref_words = utt.word_text.split()
            hyp_words = payload.word_transcript.split()
        word_alignment = align(ref_words, hyp_words)
        wer_errors += word_alignment.distance
        wer_ref_len += word_alignment.ref_len
        rows.append(
            score_utterance(utt, payload.phoneme_transcript, per_reference=config.per_reference)
        )

    mdd_section: Optional[dict] = None
    try:
        scores = corpus_mdd(rows)
        per = pooled_per(rows)
        counts = scores.counts
        mdd_section = {
            "wer": {
                "value": (wer_errors / wer_ref_len) if wer_ref_len else None,
                "errors": wer_errors,
                "ref_len": wer_ref_len,
                "n_utts": len(rows),
            },
            "per": {
                "value": None if per is None else float(per),
                "errors": sum(r.per_errors for r in rows),
                "ref_len": sum(r.per_ref_len for r in rows),
                "n_utts": len(rows),
                "reference": config.per_reference,
            },
            "precision": {"value": scores.precision, "n": counts.tp + counts.fp},
            "recall": {"value": scores.recall, "n": counts.tp + counts.fn},
            "f1": {"value": scores.f1, "n": counts.positions},
            "counts": {
                "tp": counts.tp,
                "fp": counts.fp,
                "fn": counts.fn,
                "tn": counts.tn,
                "insertions": sum(r.insertions for r in rows),
            },
            "degenerate": scores.degenerate,
            "diagnosis": {
                "correct": sum(r.diagnosis_correct for r in rows),
                "total": sum(r.diagnosis_total for r in rows),
            },
            "utterances": {
                "schema": "capt-metrics/1",
                "rows": [
                    {
                        "utt_id": r.utt_id,
                        "tp": r.counts.tp,
                        "fp": r.counts.fp,
                        "fn": r.counts.fn,
                        "tn": r.counts.tn,
                        "insertions": r.insertions,
                        "per": None if r.per is None else float(r.per),
                        "per_errors": r.per_errors,
                        "per_ref_len": r.per_ref_len,
                        "diagnosis_correct": r.diagnosis_correct,
                        "diagnosis_total": r.diagnosis_total,
                    }
                    for r in rows
                ],
            },
        }
    except NoScorableUtterances as exc:
        skipped.append({"metric": "mdd", "reason": str(exc)})

    apa_section: Optional[dict] = None
    try:
        pairs_by_dim = {
            dim: [
                (float(getattr(by_id[utt_id].scores, dim)), float(getattr(parsed, dim)))
                for utt_id, parsed in sorted(apa_by_utt.items())
            ]
            for dim in APA_DIMENSIONS
        }
        apa_section = {
            dim: _correlation_dict(result) for dim, result in apa_pcc_table(pairs_by_dim).items()
        }
    except TooFewSamples as exc:
        skipped.append({"metric": "apa_pcc", "reason": str(exc)})

    study_section: Optional[dict] = None
    points = [
        ScatterPoint(
            utt_id=row.utt_id,
            per=float(row.per),
            human_accuracy=by_id[row.utt_id].scores.accuracy,
            predicted_accuracy=(
                apa_by_utt[row.utt_id].accuracy if row.utt_id in apa_by_utt else None
            ),
        )
        for row in rows
        if row.per is not None
    ]
    try:
        study = accuracy_per_correlation(points)
        study_section = {
            "human": _correlation_dict(study.human),
            "predicted": _correlation_dict(study.predicted),
            "points": [
                [p.utt_id, p.per, p.human_accuracy, p.predicted_accuracy] for p in study.points
            ],
        }
    except TooFewSamples as exc:
        skipped.append({"metric": "accuracy_per_correlation", "reason": str(exc)})

    digest = config.digest()
    run_id = config.run_id or f"run-{digest[:12]}"
    timestamp = (
        EPOCH_TIMESTAMP
        if config.reproducible
        else datetime.now(timezone.utc).isoformat(timespec="seconds")
    )
    return {
        "schema": REPORT_SCHEMA,
        "run": {
            "run_id": run_id,
            "backend_id": raw_header.get("backend_id", "unknown"),
            "control_tokens": raw_header.get("control_tokens", "on"),
            "training_strategy_label": config.strategy_label,
            "timestamp": timestamp,
            "config_digest": digest,
        },
        "apa": apa_section,
        "mdd": mdd_section,
        "parse_failures": parse_summary,
        "correlation_study": study_section,
        "skipped": skipped,
    }


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2) + "\n", "utf-8"
    )


def read_report(path: str | Path) -> dict:
    report = json.loads(Path(path).read_text("utf-8"))
    if report.get("schema") != REPORT_SCHEMA:
        raise SchemaMismatch("schema", str(path), f"expected {REPORT_SCHEMA}")
    return report


def _pcc_cell(entry: Optional[dict]) -> str:
    if not entry or entry.get("r") is None:
        return "n/a"
    cell = f"{entry['r']:.4f}"
    p_value = entry.get("p_value")
    if p_value is not None and p_value >= SIGNIFICANCE_LEVEL:
        cell += NOT_SIGNIFICANT_MARKER
    return cell


def _rate_cell(entry: Optional[dict]) -> str:
    if not entry or entry.get("value") is None:
        return "n/a"
    return f"{entry['value']:.3f}"


def report_row(report: dict) -> list[str]:
    apa = report.get("apa") or {}
    mdd = report.get("mdd") or {}
    return [
        report["run"]["training_strategy_label"],
        report["run"]["run_id"],
        _pcc_cell(apa.get("accuracy")),
        _pcc_cell(apa.get("fluency")),
        _pcc_cell(apa.get("prosodic")),
        _pcc_cell(apa.get("total")),
        _rate_cell(mdd.get("wer")),
        _rate_cell(mdd.get("per")),
        _rate_cell(mdd.get("f1")),
        _rate_cell(mdd.get("precision")),
        _rate_cell(mdd.get("recall")),
    ]


def render_table(reports: list[dict], fmt: str = "text") -> str:
    """One row per report, in the fixed 11-column layout."""
    if not reports:
        raise CaptBenchError("render_table needs at least one report")
    rows = [report_row(r) for r in reports]
    legend = f"{NOT_SIGNIFICANT_MARKER} p >= {SIGNIFICANCE_LEVEL}"
    if fmt == "csv":
        import csv
        import io

        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(TABLE_COLUMNS)
        writer.writerows(rows)
        return buf.getvalue()
    if fmt == "markdown":
        lines = [
            "| " + " | ".join(TABLE_COLUMNS) + " |",
            "| " + " | ".join("---" for _ in TABLE_COLUMNS) + " |",
        ]
        lines += ["| " + " | ".join(row) + " |" for row in rows]
        lines.append("")
        lines.append(legend)
        return "\n".join(lines) + "\n"
    if fmt == "text":
        widths = [
            max(len(TABLE_COLUMNS[i]), *(len(row[i]) for row in rows))
            for i in range(len(TABLE_COLUMNS))
        ]
        lines = ["  ".join(col.ljust(w) for col, w in zip(TABLE_COLUMNS, widths))]
        lines.append("  ".join("-" * w for w in widths))
        lines += ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)) for row in rows]
        lines.append(legend)
        return "\n".join(lines) + "\n"
    raise CaptBenchError(f"unknown table format {fmt!r}")


def export_scatter(report: dict, out_dir: str | Path) -> list[Path]:
    """Two plot-data files: human and predicted accuracy against PER."""
    study = report.get("correlation_study")
    if not study or not study.get("points"):
        logger.warning("report has no correlation study; nothing to export")
        return []
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for side, column in (("human", "human_accuracy"), ("predicted", "predicted_accuracy")):
        result = study[side]
        r = result.get("r")
        header = f"# r={r:.4f} n={result['n']}" if r is not None else "# r=n/a (degenerate)"
        lines = [header, f"utt_id,per,{column}"]
        for utt_id, per, human_acc, pred_acc in study["points"]:
            value = human_acc if side == "human" else pred_acc
            if value is None:
                continue
            lines.append(f"{utt_id},{per},{value}")
        path = out_dir / f"{column}_vs_per.csv"
        path.write_text("\n".join(lines) + "\n", "utf-8")
        written.append(path)
    return written
