"""Two-stage pipeline: segment NDAs, classify clauses, evaluate both stages.

A batch run walks every reference document through segmentation (chat
backend), classification (classification backend), and the two-level
evaluation protocol: document level (concatenated predicted clauses vs
concatenated reference clauses, ROUGE-1) and segment level (Needleman-Wunsch
alignment, 0.7 pre-filter, then per-pair ROUGE-1 plus the expensive
backend-dependent metrics). Each document yields one append-only RunRecord;
aggregation turns records into mean +/- t-interval summaries shaped like the
report tables.

One failing document never aborts a batch: it becomes a failed record and is
counted in the report. With mock backends, a fixed seed, and fixed config,
two runs produce byte-identical records and reports (timestamps switch to a
logical clock derived from document order).
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from .align import (
    AlignedPair,
    Alignment,
    AlignmentConfig,
    ComparisonStats,
    comparison_stats,
    filter_aligned_pairs,
    needleman_wunsch,
)
from .backends import (
    BackendConfig,
    ChatRequest,
    chat_complete,
    classify,
    register_oracle_labels,
)
from .corpus import NUM_LABELS, Document, extract_delimited_clauses
from .errors import (
    BackendFailure,
    ClassificationError,
    ConfigError,
    PipelineError,
    SegmentationEmpty,
)
from .metrics import (
    MetricSummary,
    evaluate_label_matrices,
    point_summary,
    rouge1,
    t_confidence_interval,
    tokenize,
)
from .prompts import SEGMENT_SYSTEM_PROMPT, load_template, prompt_hash
from .semantic import factual_correctness, semantic_similarity

log = logging.getLogger(__name__)

DOCUMENT_PLACEHOLDER = "{document}"


@dataclass(frozen=True)
class SegmentationOutput:
    document_id: str
    predicted_clauses: tuple[str, ...]
    raw_model_output: str
    input_tokens: int
    output_tokens: int

    def to_dict(self) -> dict:
        return {
            "document_id": self.document_id,
            "predicted_clauses": list(self.predicted_clauses),
            "raw_model_output": self.raw_model_output,
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SegmentationOutput":
        return cls(
            d["document_id"],
            tuple(d["predicted_clauses"]),
            d["raw_model_output"],
            int(d["input_tokens"]),
            int(d["output_tokens"]),
        )


@dataclass(frozen=True)
class ClassifiedClause:
    text: str
    probabilities: tuple[float, ...]
    labels: frozenset[int]

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "probabilities": list(self.probabilities),
            "labels": sorted(self.labels),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifiedClause":
        return cls(d["text"], tuple(d["probabilities"]), frozenset(d["labels"]))


def segment_document(
    raw_text: str, prompt_template: str, backend: BackendConfig
) -> SegmentationOutput:
    """Send the document through the segmentation prompt and parse the blocks."""
    if not raw_text:
        raise ValueError("raw_text must be non-empty")
    if DOCUMENT_PLACEHOLDER not in prompt_template:
        raise ConfigError(f"segment template lacks {DOCUMENT_PLACEHOLDER}")
    user_content = prompt_template.replace(DOCUMENT_PLACEHOLDER, raw_text)
    raw = chat_complete(backend, ChatRequest(SEGMENT_SYSTEM_PROMPT, user_content))
    clauses = extract_delimited_clauses(raw)
    if not clauses:
        raise SegmentationEmpty("model output contained no clause blocks")
    return SegmentationOutput(
        document_id="",
        predicted_clauses=tuple(clauses),
        raw_model_output=raw,
        input_tokens=len(tokenize(raw_text)),
        output_tokens=len(tokenize(raw)),
    )


def labels_to_row(labels: Sequence[int] | frozenset[int]) -> list[int]:
    """Binary 14-vector for a label set."""
    return [1 if l in labels else 0 for l in range(1, NUM_LABELS + 1)]


def classify_clauses(
    clauses: Sequence[str], backend: BackendConfig, decision_threshold: float = 0.5
) -> list[ClassifiedClause]:
    """Classify each clause; threshold probabilities, argmax as the fallback.

    Every clause gets at least one label: if no probability clears the
    threshold, the single highest-probability label is assigned.
    """
    if not clauses:
        raise ValueError("clauses must be a non-empty list")
    if not 0.0 <= decision_threshold <= 1.0:
        raise ValueError("decision_threshold must be in [0, 1]")
    out: list[ClassifiedClause] = []
    for i, text in enumerate(clauses):
        try:
            response = classify(backend, text)
        except BackendFailure as exc:
            raise ClassificationError(i, exc) from exc
        probs = response.probabilities
        labels = {l + 1 for l, p in enumerate(probs) if p >= decision_threshold}
        if not labels:
            labels = {max(range(NUM_LABELS), key=lambda l: probs[l]) + 1}
        out.append(ClassifiedClause(text, probs, frozenset(labels)))
    return out


def evaluate_document_level(reference: Document, seg: SegmentationOutput) -> dict[str, float]:
    """ROUGE-1 between concatenated predicted clauses and reference clauses."""
    candidate = "\n".join(seg.predicted_clauses)
    score = rouge1(candidate, reference.clause_text())
    return {
        "rouge_recall": score.recall,
        "rouge_precision": score.precision,
        "rouge_f1": score.f1,
    }


def evaluate_segment_level(
    reference: Document,
    seg: SegmentationOutput,
    cfg: AlignmentConfig = AlignmentConfig(),
    embed_backend: BackendConfig | None = None,
    judge_backend: BackendConfig | None = None,
    memo: dict | None = None,
) -> tuple[Alignment, dict[str, list], ComparisonStats]:
    """Align, pre-filter, and score surviving pairs.

    ROUGE-1 and the alignment score are always computed; factual correctness
    and semantic similarity only when their backends are given. A backend
    failure on one pair leaves a None in that metric's list (the pair is
    incomplete) without disturbing the cheap metrics.
    """
    refs = [c.text for c in reference.clauses]
    preds = list(seg.predicted_clauses)
    al = needleman_wunsch(refs, preds, cfg)
    kept = filter_aligned_pairs(al, cfg.filter_threshold)
    stats = comparison_stats(al, len(kept))

    metrics: dict[str, list] = {
        "alignment": [p.score for p in kept],
        "rouge_recall": [],
        "rouge_precision": [],
        "rouge_f1": [],
    }
    for pair in kept:
        score = rouge1(preds[pair.pred_index], refs[pair.ref_index])
        metrics["rouge_recall"].append(score.recall)
        metrics["rouge_precision"].append(score.precision)
        metrics["rouge_f1"].append(score.f1)

    def expensive(pair: AlignedPair) -> tuple[float | None, float | None]:
        fc = ss = None
        cand, ref = preds[pair.pred_index], refs[pair.ref_index]
        if judge_backend is not None:
            try:
                fc = factual_correctness(cand, ref, judge_backend, memo=memo).f1
            except BackendFailure as exc:
                log.warning("factual correctness failed for pair %s: %s", tuple(pair[:2]), exc)
        if embed_backend is not None:
            try:
                ss = semantic_similarity(cand, ref, embed_backend)
            except BackendFailure as exc:
                log.warning("semantic similarity failed for pair %s: %s", tuple(pair[:2]), exc)
        return fc, ss

    if kept and (judge_backend is not None or embed_backend is not None):
        width = max(
            b.max_concurrency for b in (judge_backend, embed_backend) if b is not None
        )
        with ThreadPoolExecutor(max_workers=min(width, len(kept))) as pool:
            results = list(pool.map(expensive, kept))
        if judge_backend is not None:
            metrics["factual_correctness"] = [fc for fc, _ in results]
        if embed_backend is not None:
            metrics["semantic_similarity"] = [ss for _, ss in results]

    return al, metrics, stats


def evaluate_classification(y_true, y_pred) -> dict[str, float]:
    """Macro F1, weighted F1, Hamming loss, and MCC for label matrices."""
    return evaluate_label_matrices(y_true, y_pred)


# --- run records ---


@dataclass(frozen=True)
class RunRecord:
    document_id: str
    status: str  # "complete" | "failed"
    error: str | None
    segmentation: SegmentationOutput | None
    classified: tuple[ClassifiedClause, ...]
    alignment: Alignment | None
    document_level_metrics: dict[str, float]
    segment_level_metrics: dict[str, list]
    pair_labels: tuple[dict, ...]  # per kept pair: ref/pred indices + label rows
    comparison: ComparisonStats | None
    timestamps: dict[str, str]
    backend_meta: dict[str, str]

    def to_dict(self) -> dict:
        return {
            "document_id": self.document_id,
            "status": self.status,
            "error": self.error,
            "segmentation": self.segmentation.to_dict() if self.segmentation else None,
            "classified": [c.to_dict() for c in self.classified],
            "alignment": self.alignment.to_dict() if self.alignment else None,
            "document_level_metrics": self.document_level_metrics,
            "segment_level_metrics": self.segment_level_metrics,
            "pair_labels": list(self.pair_labels),
            "comparison": self.comparison.to_dict() if self.comparison else None,
            "timestamps": self.timestamps,
            "backend_meta": self.backend_meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        comparison = d.get("comparison")
        return cls(
            document_id=d["document_id"],
            status=d["status"],
            error=d.get("error"),
            segmentation=(
                SegmentationOutput.from_dict(d["segmentation"]) if d.get("segmentation") else None
            ),
            classified=tuple(ClassifiedClause.from_dict(c) for c in d.get("classified", [])),
            alignment=Alignment.from_dict(d["alignment"]) if d.get("alignment") else None,
            document_level_metrics=d.get("document_level_metrics", {}),
            segment_level_metrics=d.get("segment_level_metrics", {}),
            pair_labels=tuple(d.get("pair_labels", [])),
            comparison=ComparisonStats(**comparison) if comparison else None,
            timestamps=d.get("timestamps", {}),
            backend_meta=d.get("backend_meta", {}),
        )


def dump_record(record: RunRecord) -> str:
    return json.dumps(record.to_dict(), sort_keys=True, separators=(",", ":"))


def load_records(path: str | Path) -> list[RunRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(RunRecord.from_dict(json.loads(line)))
    return records


# --- aggregation ---


METRIC_DISPLAY_NAMES = {
    "rouge_recall": "ROUGE-Recall",
    "rouge_precision": "ROUGE-Precision",
    "rouge_f1": "ROUGE-F1-Score",
    "factual_correctness": "Factual Correctness",
    "semantic_similarity": "Semantic Similarity",
    "alignment": "Alignment",
    "macro_f1": "Macro F1",
    "weighted_f1": "Weighted F1",
    "hamming_loss": "Hamming Loss",
    "mcc": "MCC",
}

# Fixed row orders for the rendered report tables.
_DOC_METRIC_ORDER = ("rouge_recall", "rouge_precision", "rouge_f1")
_SEG_METRIC_ORDER = (
    "rouge_recall",
    "rouge_precision",
    "rouge_f1",
    "factual_correctness",
    "semantic_similarity",
    "alignment",
)
_CLS_METRIC_ORDER = ("macro_f1", "weighted_f1", "hamming_loss", "mcc")


@dataclass(frozen=True)
class AggregateReport:
    document_level: dict[str, MetricSummary]
    segment_level: dict[str, MetricSummary]
    classification: dict[str, float] | None
    comparison: dict
    n_documents: int
    n_failed: int
    failed_ids: tuple[str, ...]
    level: float

    def to_dict(self) -> dict:
        return {
            "document_level": {k: v.to_dict() for k, v in self.document_level.items()},
            "segment_level": {k: v.to_dict() for k, v in self.segment_level.items()},
            "classification": self.classification,
            "comparison": self.comparison,
            "n_documents": self.n_documents,
            "n_failed": self.n_failed,
            "failed_ids": list(self.failed_ids),
            "level": self.level,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def render_table(self) -> str:
        pct = int(round(self.level * 100))
        lines = [
            f"Documents evaluated: {self.n_documents - self.n_failed} of {self.n_documents}"
            + (f" (failed: {', '.join(self.failed_ids)})" if self.failed_ids else ""),
            "",
            "Document level (reference document vs generated document)",
        ]

        def block(summaries: dict[str, MetricSummary], order: Sequence[str]) -> list[str]:
            rows = []
            for key in order:
                if key not in summaries:
                    continue
                s = summaries[key]
                name = METRIC_DISPLAY_NAMES.get(key, key)
                flag = "  (single sample)" if s.degenerate else ""
                rows.append(
                    f"  {name:<22} {s.mean:.4f} ± {s.half_width:.4f}"
                    f"  (n={s.n}, {pct}% CI){flag}"
                )
            return rows or ["  (no samples)"]

        lines += block(self.document_level, _DOC_METRIC_ORDER)
        lines += ["", "Segment level (reference segment vs generated segment)"]
        lines += block(self.segment_level, _SEG_METRIC_ORDER)
        lines += ["", "Classification"]
        if self.classification:
            for key in _CLS_METRIC_ORDER:
                if key in self.classification:
                    name = METRIC_DISPLAY_NAMES.get(key, key)
                    lines.append(f"  {name:<22} {self.classification[key]:.4f}")
        else:
            lines.append("  (no classification data)")
        lines += [
            "",
            "Clause comparisons",
            (
                f"  naive={self.comparison['naive_pairs']}"
                f"  evaluated={self.comparison['evaluated_pairs']}"
                f"  reduction={self.comparison['reduction_pct']:.1f}%"
                f"  mean-per-document={self.comparison['mean_reduction_pct']:.1f}%"
            ),
        ]
        return "\n".join(lines) + "\n"


def _summarize(samples: list[float], level: float) -> MetricSummary | None:
    if not samples:
        return None
    if len(samples) == 1:
        return point_summary(samples[0], level)
    return t_confidence_interval(samples, level)


def aggregate(records: Sequence[RunRecord], level: float = 0.95) -> AggregateReport:
    """Fold run records into the three report blocks.

    Document-level summaries take one sample per complete document;
    segment-level summaries pool all surviving aligned pairs across
    documents; the classification block pools per-pair label rows.
    """
    complete = [r for r in records if r.status == "complete"]
    failed = [r for r in records if r.status != "complete"]

    document_level: dict[str, MetricSummary] = {}
    metric_names = sorted({m for r in complete for m in r.document_level_metrics})
    for name in metric_names:
        samples = [
            r.document_level_metrics[name] for r in complete if name in r.document_level_metrics
        ]
        summary = _summarize(samples, level)
        if summary:
            document_level[name] = summary

    segment_level: dict[str, MetricSummary] = {}
    seg_names = sorted({m for r in complete for m in r.segment_level_metrics})
    for name in seg_names:
        pooled = [
            v
            for r in complete
            for v in r.segment_level_metrics.get(name, [])
            if v is not None
        ]
        summary = _summarize(pooled, level)
        if summary:
            segment_level[name] = summary

    y_true = [row["ref_labels"] for r in complete for row in r.pair_labels]
    y_pred = [row["pred_labels"] for r in complete for row in r.pair_labels]
    # The block needs annotated references: all-zero truth rows carry no signal.
    classification = (
        evaluate_label_matrices(y_true, y_pred)
        if y_true and any(any(row) for row in y_true)
        else None
    )

    naive = sum(r.comparison.naive_pairs for r in complete if r.comparison)
    evaluated = sum(r.comparison.evaluated_pairs for r in complete if r.comparison)
    reductions = [r.comparison.reduction_pct for r in complete if r.comparison]
    comparison = {
        "naive_pairs": naive,
        "evaluated_pairs": evaluated,
        "reduction_pct": 100.0 * (1.0 - evaluated / naive) if naive else 0.0,
        "mean_reduction_pct": sum(reductions) / len(reductions) if reductions else 0.0,
    }

    return AggregateReport(
        document_level=document_level,
        segment_level=segment_level,
        classification=classification,
        comparison=comparison,
        n_documents=len(records),
        n_failed=len(failed),
        failed_ids=tuple(r.document_id for r in failed),
        level=level,
    )


# --- batch runner ---


@dataclass(frozen=True)
class PipelineConfig:
    chat: BackendConfig
    classify: BackendConfig | None = None
    embed: BackendConfig | None = None
    judge: BackendConfig | None = None
    segment_template: str = "segment"
    filter_threshold: float = 0.7
    decision_threshold: float = 0.5
    gap_penalty: float = -0.25
    seed: int = 0
    workers: int = 4
    level: float = 0.95
    run_id: str = "run"
    out_dir: str = "runs"
    input_dir: str | None = None
    deterministic: bool | None = None  # None: logical clock iff all backends are mock

    def alignment_config(self) -> AlignmentConfig:
        return AlignmentConfig(
            gap_penalty=self.gap_penalty, filter_threshold=self.filter_threshold
        )

    def all_mock(self) -> bool:
        return all(
            b.is_mock for b in (self.chat, self.classify, self.embed, self.judge)
            if b is not None
        )

    def use_logical_clock(self) -> bool:
        return self.all_mock() if self.deterministic is None else self.deterministic


_BACKEND_FIELDS = {
    "base_url", "model_name", "api_key", "timeout", "max_retries",
    "max_concurrency", "backoff_base", "backoff_factor", "backoff_jitter",
}


def _backend_from_dict(d: dict, name: str) -> BackendConfig:
    unknown = set(d) - _BACKEND_FIELDS
    if unknown:
        raise ConfigError(f"backend {name!r}: unknown keys {sorted(unknown)}")
    if "base_url" not in d:
        raise ConfigError(f"backend {name!r}: base_url is required")
    try:
        return BackendConfig(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"backend {name!r}: {exc}") from exc


def config_from_dict(data: dict) -> PipelineConfig:
    try:
        backends = data.get("backends", {})
        if "chat" not in backends:
            raise ConfigError("backends.chat is required")
        thresholds = data.get("thresholds", {})
        kwargs = dict(
            chat=_backend_from_dict(backends["chat"], "chat"),
            segment_template=data.get("prompts", {}).get("segment", "segment"),
            filter_threshold=float(thresholds.get("filter", 0.7)),
            decision_threshold=float(thresholds.get("decision", 0.5)),
            gap_penalty=float(data.get("gap_penalty", -0.25)),
            seed=int(data.get("seed", 0)),
            workers=int(data.get("workers", 4)),
            level=float(data.get("level", 0.95)),
            run_id=str(data.get("run_id", "run")),
            out_dir=str(data.get("out_dir", "runs")),
            input_dir=data.get("input_dir"),
            deterministic=data.get("deterministic"),
        )
        for name in ("classify", "embed", "judge"):
            if backends.get(name):
                kwargs[name] = _backend_from_dict(backends[name], name)
        cfg = PipelineConfig(**kwargs)
        if cfg.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0.0 <= cfg.filter_threshold <= 1.0:
            raise ConfigError("thresholds.filter must be in [0, 1]")
        if not 0.0 <= cfg.decision_threshold <= 1.0:
            raise ConfigError("thresholds.decision must be in [0, 1]")
        cfg.alignment_config()  # validates gap penalty
        return cfg
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> PipelineConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return config_from_dict(data)


def _make_clock(logical: bool) -> Callable[[int, int], str]:
    if logical:
        return lambda doc_index, phase: f"logical:{doc_index:06d}.{phase}"
    return lambda doc_index, phase: datetime.now(timezone.utc).isoformat()


def _process_document(
    reference: Document,
    doc_index: int,
    cfg: PipelineConfig,
    template: str,
    meta: dict[str, str],
    clock: Callable[[int, int], str],
    memo: dict,
) -> RunRecord:
    started = clock(doc_index, 0)
    try:
        raw_text = reference.raw_text or reference.clause_text()
        seg = segment_document(raw_text, template, cfg.chat)
        seg = SegmentationOutput(
            document_id=reference.id,
            predicted_clauses=seg.predicted_clauses,
            raw_model_output=seg.raw_model_output,
            input_tokens=seg.input_tokens,
            output_tokens=seg.output_tokens,
        )
        classified: tuple[ClassifiedClause, ...] = ()
        if cfg.classify is not None:
            classified = tuple(
                classify_clauses(seg.predicted_clauses, cfg.classify, cfg.decision_threshold)
            )
        align_cfg = cfg.alignment_config()
        al, seg_metrics, stats = evaluate_segment_level(
            reference, seg, align_cfg, cfg.embed, cfg.judge, memo
        )
        doc_metrics = evaluate_document_level(reference, seg)
        pair_labels: list[dict] = []
        if classified:
            for pair in filter_aligned_pairs(al, align_cfg.filter_threshold):
                pair_labels.append(
                    {
                        "ref_index": pair.ref_index,
                        "pred_index": pair.pred_index,
                        "ref_labels": labels_to_row(reference.clauses[pair.ref_index].labels),
                        "pred_labels": labels_to_row(classified[pair.pred_index].labels),
                    }
                )
        return RunRecord(
            document_id=reference.id,
            status="complete",
            error=None,
            segmentation=seg,
            classified=classified,
            alignment=al,
            document_level_metrics=doc_metrics,
            segment_level_metrics=seg_metrics,
            pair_labels=tuple(pair_labels),
            comparison=stats,
            timestamps={"started": started, "finished": clock(doc_index, 1)},
            backend_meta=meta,
        )
    except (PipelineError, BackendFailure) as exc:
        log.warning("document %s failed: %s", reference.id, exc)
        return RunRecord(
            document_id=reference.id,
            status="failed",
            error=str(exc),
            segmentation=None,
            classified=(),
            alignment=None,
            document_level_metrics={},
            segment_level_metrics={},
            pair_labels=(),
            comparison=None,
            timestamps={"started": started, "finished": clock(doc_index, 1)},
            backend_meta=meta,
        )


@dataclass(frozen=True)
class BatchResult:
    records: tuple[RunRecord, ...]
    report: AggregateReport
    skipped: int  # documents resumed from existing records


def run_batch(
    references: Sequence[Document],
    cfg: PipelineConfig,
    existing: Sequence[RunRecord] = (),
) -> BatchResult:
    """Run the full pipeline over a batch of reference documents.

    Documents already present in ``existing`` as complete records with a
    matching prompt hash are skipped (resumability); everything else runs on
    a bounded worker pool, and records come back in input order.
    """
    template = load_template(cfg.segment_template)
    meta = {
        "chat_model": cfg.chat.model_name or cfg.chat.base_url,
        "classify_model": (cfg.classify.model_name or cfg.classify.base_url)
        if cfg.classify
        else "",
        "embed_model": (cfg.embed.model_name or cfg.embed.base_url) if cfg.embed else "",
        "judge_model": (cfg.judge.model_name or cfg.judge.base_url) if cfg.judge else "",
        "prompt_hash": prompt_hash(template),
    }
    clock = _make_clock(cfg.use_logical_clock())

    if cfg.classify is not None and cfg.classify.is_mock:
        mode, _ = cfg.classify.mock_mode()
        if mode == "oracle":
            register_oracle_labels(
                {c.text: c.labels for doc in references for c in doc.clauses}
            )

    reusable = {
        r.document_id: r
        for r in existing
        if r.status == "complete" and r.backend_meta.get("prompt_hash") == meta["prompt_hash"]
    }

    memo: dict = {}
    results: dict[int, RunRecord] = {}
    todo: list[tuple[int, Document]] = []
    for idx, doc in enumerate(references):
        if doc.id in reusable:
            results[idx] = reusable[doc.id]
        else:
            todo.append((idx, doc))

    if todo:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = {
                pool.submit(
                    _process_document, doc, idx, cfg, template, meta, clock, memo
                ): idx
                for idx, doc in todo
            }
            for future, idx in futures.items():
                results[idx] = future.result()

    records = tuple(results[idx] for idx in range(len(references)))
    report = aggregate(records, cfg.level)
    return BatchResult(records=records, report=report, skipped=len(references) - len(todo))


def write_run_outputs(run_dir: str | Path, result: BatchResult) -> Path:
    """Persist records.jsonl, report.json, and report.txt under run_dir."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    lines = "".join(dump_record(r) + "\n" for r in result.records)
    (run_dir / "records.jsonl").write_text(lines, encoding="utf-8")
    (run_dir / "report.json").write_text(result.report.to_json(), encoding="utf-8")
    (run_dir / "report.txt").write_text(result.report.render_table(), encoding="utf-8")
    return run_dir
