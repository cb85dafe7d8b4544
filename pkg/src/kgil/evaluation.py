"""Evaluation harness: truth checking, completeness, growth tracking,
timing records, and comparative reports across systems.

Truth checking ships in two modes. Judge mode delegates to the model and
then applies structural post-filters (a flagged phrase must appear in the
answer and must not appear in the ground truth) because raw model scoring
proved unreliable. Deterministic mode needs no model at all: it flags
answer sentences whose content-word overlap with the ground truth falls
below a threshold. Both produce results whose counts are exact by
construction.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Callable

from .gateway import Gateway
from .store import GraphSnapshotStats, GrowthDelta, growth
from .textutil import (
    content_words,
    fold,
    normalize_ws,
    sentences,
    stemmed_content_words,
)

logger = logging.getLogger(__name__)

FLAG_OVERLAP_THRESHOLD = 0.5
ADDRESSED_THRESHOLD = 0.6


class EvalError(Exception):
    pass


class CorpusError(EvalError):
    pass


@dataclass
class GroundTruthDoc:
    question_id: str
    items: list[str]
    full_text: str

    def __post_init__(self):
        if not self.items:
            raise ValueError("ground truth must contain at least one item")
        if any(not i.strip() for i in self.items):
            raise ValueError("ground truth items must be non-blank")

    @classmethod
    def from_text(cls, question_id: str, text: str) -> "GroundTruthDoc":
        items = [ln.strip() for ln in text.splitlines() if ln.strip()]
        return cls(question_id=question_id, items=items, full_text=text)


@dataclass
class TruthCheckResult:
    errors_invalid: list[str]
    count_invalid: int

    def __post_init__(self):
        if self.count_invalid != len(self.errors_invalid):
            raise ValueError("count_invalid must equal len(errors_invalid)")


@dataclass
class CompletenessResult:
    missing_items: list[str]
    count_missing: int
    verified: bool = False  # flipped by a human reviewer after manual check

    def __post_init__(self):
        if self.count_missing != len(self.missing_items):
            raise ValueError("count_missing must equal len(missing_items)")


def _dedupe(items: list[str]) -> list[str]:
    seen = set()
    out = []
    for item in items:
        key = fold(item)
        if key and key not in seen:
            seen.add(key)
            out.append(item)
    return out


def truth_check_deterministic(
    answer_text: str,
    gt: GroundTruthDoc,
    threshold: float = FLAG_OVERLAP_THRESHOLD,
) -> TruthCheckResult:
    """Flag answer sentences poorly supported by the ground truth text."""
    gt_words = set(content_words(gt.full_text))
    flagged = []
    for sentence in sentences(answer_text):
        words = content_words(sentence)
        if not words:
            continue
        overlap = sum(1 for w in words if w in gt_words) / len(words)
        if overlap < threshold:
            flagged.append(normalize_ws(sentence))
    flagged = _dedupe(flagged)
    return TruthCheckResult(errors_invalid=flagged, count_invalid=len(flagged))


def truth_check_judge(
    answer_text: str,
    gt: GroundTruthDoc,
    gateway: Gateway,
    question_text: str = "",
) -> TruthCheckResult:
    """Model-flagged phrases, structurally post-filtered.

    Guarantees on every output phrase: it occurs (case/space-insensitively)
    in the answer, and it does not occur in the ground truth.
    """
    response = gateway.ask(
        "truth_check",
        {
            "question": question_text or gt.question_id,
            "groundTruth": gt.full_text,
            "answer": answer_text,
        },
    )
    answer_fold = fold(answer_text)
    gt_fold = fold(gt.full_text)
    kept = []
    for raw in response.content.split("::"):
        phrase = normalize_ws(raw)
        if not phrase:
            continue
        phrase_fold = fold(phrase)
        if phrase_fold not in answer_fold:
            continue
        if phrase_fold in gt_fold:
            continue
        kept.append(phrase)
    kept = _dedupe(kept)
    return TruthCheckResult(errors_invalid=kept, count_invalid=len(kept))


def truth_check(
    answer_text: str,
    gt: GroundTruthDoc,
    mode: str = "deterministic",
    gateway: Gateway | None = None,
    question_text: str = "",
    threshold: float = FLAG_OVERLAP_THRESHOLD,
) -> TruthCheckResult:
    if mode == "deterministic":
        return truth_check_deterministic(answer_text, gt, threshold)
    if mode == "judge":
        if gateway is None:
            raise ValueError("judge mode requires a gateway")
        return truth_check_judge(answer_text, gt, gateway, question_text)
    raise ValueError(f"unknown truth mode: {mode}")


def completeness(
    answer_text: str,
    gt: GroundTruthDoc,
    threshold: float = ADDRESSED_THRESHOLD,
) -> CompletenessResult:
    """A ground-truth item is addressed when enough of its content words
    (after stemming) appear anywhere in the answer."""
    answer_stems = set(stemmed_content_words(answer_text))
    missing = []
    for item in gt.items:
        stems = set(stemmed_content_words(item))
        if not stems:
            continue
        matched = sum(1 for s in stems if s in answer_stems)
        if matched / len(stems) < threshold:
            missing.append(item)
    return CompletenessResult(missing_items=missing, count_missing=len(missing))


@dataclass(frozen=True)
class TimingRecord:
    t_l: float
    t_r: float
    t_a: float
    t_total: float = field(init=False)

    def __post_init__(self):
        if min(self.t_l, self.t_r, self.t_a) < 0:
            raise ValueError("timing components must be non-negative")
        object.__setattr__(self, "t_total", self.t_l + self.t_r + self.t_a)


ZERO_TIMING = TimingRecord(0.0, 0.0, 0.0)


@dataclass
class EvalRow:
    question_id: str
    system: str
    count_invalid: int
    count_missing: int
    timing: TimingRecord
    triples_after: int = 0
    error: str | None = None


@dataclass
class SystemAggregate:
    system: str
    invalid_total: int
    invalid_max: int
    missing_total: int
    missing_max: int


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)

    def systems(self) -> list[str]:
        ordered = []
        for row in self.rows:
            if row.system not in ordered:
                ordered.append(row.system)
        return ordered

    def aggregate(self, system: str) -> SystemAggregate:
        rows = [r for r in self.rows if r.system == system and r.error is None]
        return SystemAggregate(
            system=system,
            invalid_total=sum(r.count_invalid for r in rows),
            invalid_max=max((r.count_invalid for r in rows), default=0),
            missing_total=sum(r.count_missing for r in rows),
            missing_max=max((r.count_missing for r in rows), default=0),
        )

    def aggregates(self) -> list[SystemAggregate]:
        return [self.aggregate(s) for s in self.systems()]


# An answer source maps a question to its answer text (plus optional timing
# and post-question store size). Transcript directories and the live
# pipeline both satisfy this contract.
@dataclass
class SystemAnswer:
    text: str
    timing: TimingRecord = ZERO_TIMING
    triples_after: int = 0


AnswerSource = Callable[[dict], SystemAnswer]


@dataclass
class SystemSpec:
    name: str
    source: AnswerSource


def transcript_source(directory: str) -> AnswerSource:
    def read(question: dict) -> SystemAnswer:
        path = os.path.join(directory, f"{question['id']}.txt")
        if not os.path.exists(path):
            raise CorpusError(f"no transcript for {question['id']} in {directory}")
        with open(path, "r", encoding="utf-8") as fh:
            return SystemAnswer(text=fh.read())

    return read


def load_questions(corpus_dir: str) -> list[dict]:
    path = os.path.join(corpus_dir, "questions.json")
    if not os.path.exists(path):
        raise CorpusError(f"no questions file at {path}")
    with open(path, "r", encoding="utf-8") as fh:
        questions = json.load(fh)
    if not isinstance(questions, list) or not questions:
        raise CorpusError("questions file must be a non-empty array")
    for q in questions:
        if "id" not in q or "text" not in q:
            raise CorpusError(f"question entry lacks id/text: {q}")
    return questions


def load_ground_truth(corpus_dir: str, question: dict) -> GroundTruthDoc:
    name = question.get("ground_truth_file", f"{question['id']}.txt")
    path = os.path.join(corpus_dir, "ground_truth", name)
    if not os.path.exists(path):
        raise CorpusError(f"no ground truth file at {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return GroundTruthDoc.from_text(question["id"], fh.read())


def run_eval(
    corpus_dir: str,
    systems: list[SystemSpec],
    truth_mode: str = "deterministic",
    gateway: Gateway | None = None,
) -> EvalReport:
    """Evaluate every system over the corpus questions, in corpus order.

    Row-level failures are recorded on the row instead of aborting the run.
    """
    if truth_mode not in ("deterministic", "judge"):
        raise ValueError(f"unknown truth mode: {truth_mode}")
    if truth_mode == "judge" and gateway is None:
        raise ValueError("judge mode requires a gateway")
    questions = load_questions(corpus_dir)
    report = EvalReport()
    for spec in systems:
        for question in questions:
            try:
                gt = load_ground_truth(corpus_dir, question)
                answer = spec.source(question)
                if truth_mode == "judge":
                    truth = truth_check_judge(
                        answer.text, gt, gateway, question["text"]
                    )
                else:
                    truth = truth_check_deterministic(answer.text, gt)
                missing = completeness(answer.text, gt)
                report.rows.append(
                    EvalRow(
                        question_id=question["id"],
                        system=spec.name,
                        count_invalid=truth.count_invalid,
                        count_missing=missing.count_missing,
                        timing=answer.timing,
                        triples_after=answer.triples_after,
                    )
                )
            except (EvalError, OSError) as exc:
                logger.warning("row failed: %s/%s: %s", spec.name, question["id"], exc)
                report.rows.append(
                    EvalRow(
                        question_id=question["id"],
                        system=spec.name,
                        count_invalid=0,
                        count_missing=0,
                        timing=ZERO_TIMING,
                        error=str(exc),
                    )
                )
    return report


def track_growth(
    snapshots: list[tuple[int, GraphSnapshotStats]],
    checkpoints: tuple[int, ...] = (1, 10, 20),
) -> list[tuple[int, GraphSnapshotStats, GrowthDelta | None]]:
    """Stats at each checkpoint plus the delta from the previous checkpoint.

    Also logs a warning for any monotonicity violation in the raw log.
    """
    by_index = dict(snapshots)
    previous_count = None
    for index, stats in snapshots:
        if previous_count is not None and stats.triple_count < previous_count:
            logger.warning(
                "triple count shrank at question %d: %d", index, stats.triple_count
            )
        previous_count = stats.triple_count
    out: list[tuple[int, GraphSnapshotStats, GrowthDelta | None]] = []
    previous: GraphSnapshotStats | None = None
    for index in checkpoints:
        if index not in by_index:
            continue
        stats = by_index[index]
        delta = growth(previous, stats) if previous is not None else None
        out.append((index, stats, delta))
        previous = stats
    return out


CSV_COLUMNS = (
    "question_id",
    "system",
    "count_invalid",
    "count_missing",
    "t_L",
    "t_R",
    "t_A",
    "t_total",
    "triples_after",
)


def export_report(report: EvalReport, fmt: str = "csv") -> bytes:
    if fmt == "csv":
        return _export_csv(report)
    if fmt == "structured":
        return _export_structured(report)
    if fmt == "table-text":
        return _export_table(report)
    raise ValueError(f"unknown report format: {fmt}")


def _row_values(row: EvalRow) -> list:
    return [
        row.question_id,
        row.system,
        row.count_invalid,
        row.count_missing,
        repr(row.timing.t_l),
        repr(row.timing.t_r),
        repr(row.timing.t_a),
        repr(row.timing.t_total),
        row.triples_after,
    ]


def _export_csv(report: EvalReport) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, quoting=csv.QUOTE_ALL, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in report.rows:
        writer.writerow(_row_values(row))
    for agg in report.aggregates():
        writer.writerow(
            ["TOTAL", agg.system, agg.invalid_total, agg.missing_total,
             "", "", "", "", ""]
        )
    return buffer.getvalue().encode("utf-8")


def _export_structured(report: EvalReport) -> bytes:
    doc = {
        "rows": [
            {
                "question_id": r.question_id,
                "system": r.system,
                "count_invalid": r.count_invalid,
                "count_missing": r.count_missing,
                "t_L": r.timing.t_l,
                "t_R": r.timing.t_r,
                "t_A": r.timing.t_a,
                "t_total": r.timing.t_total,
                "triples_after": r.triples_after,
                "error": r.error,
            }
            for r in report.rows
        ],
        "aggregates": [
            {
                "system": a.system,
                "invalid_total": a.invalid_total,
                "invalid_max": a.invalid_max,
                "missing_total": a.missing_total,
                "missing_max": a.missing_max,
            }
            for a in report.aggregates()
        ],
    }
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _export_table(report: EvalReport) -> bytes:
    widths = [len(c) for c in CSV_COLUMNS]
    rows = [[str(v) for v in _row_values(r)] for r in report.rows]
    for row in rows:
        widths = [max(w, len(v)) for w, v in zip(widths, row)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(CSV_COLUMNS, widths))]
    for row in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_report_structured(data: bytes) -> EvalReport:
    doc = json.loads(data.decode("utf-8"))
    report = EvalReport()
    for r in doc["rows"]:
        report.rows.append(
            EvalRow(
                question_id=r["question_id"],
                system=r["system"],
                count_invalid=r["count_invalid"],
                count_missing=r["count_missing"],
                timing=TimingRecord(r["t_L"], r["t_R"], r["t_A"]),
                triples_after=r["triples_after"],
                error=r.get("error"),
            )
        )
    return report


def parse_report_csv(data: bytes) -> EvalReport:
    reader = csv.reader(io.StringIO(data.decode("utf-8")))
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected csv header: {header}")
    report = EvalReport()
    for row in reader:
        if row[0] == "TOTAL":
            continue
        report.rows.append(
            EvalRow(
                question_id=row[0],
                system=row[1],
                count_invalid=int(row[2]),
                count_missing=int(row[3]),
                timing=TimingRecord(float(row[4]), float(row[5]), float(row[6])),
                triples_after=int(row[8]),
            )
        )
    return report
