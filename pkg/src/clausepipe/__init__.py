"""clausepipe: NDA clause segmentation, classification, and evaluation.

The toolkit is organized around the two-stage architecture it evaluates:

- :mod:`clausepipe.corpus` parses and serializes the annotated delimiter
  format, owns the 14-class taxonomy, and splits corpora stratified by label.
- :mod:`clausepipe.metrics` holds the pure metrics: ROUGE-1, multi-label
  F1/Hamming/MCC, focal loss, and Student's-t confidence intervals.
- :mod:`clausepipe.align` aligns predicted vs reference clause sequences
  with Needleman-Wunsch and pre-filters pairs by similarity.
- :mod:`clausepipe.backends` talks to chat/embedding/classification
  endpoints (or their offline mocks).
- :mod:`clausepipe.semantic` computes embedding similarity and judge-based
  factual correctness.
- :mod:`clausepipe.pipeline` orchestrates batches and aggregates reports.
- :mod:`clausepipe.cli` exposes it all as `clausepipe` subcommands.
"""

from .align import (
    AlignedPair,
    Alignment,
    AlignmentConfig,
    ComparisonStats,
    clause_similarity,
    comparison_stats,
    filter_aligned_pairs,
    needleman_wunsch,
)
from .backends import (
    BackendConfig,
    ChatRequest,
    ClassificationResponse,
    EmbeddingVector,
    chat_complete,
    classify,
    embed,
)
from .corpus import (
    LABEL_NAMES,
    NUM_LABELS,
    TAXONOMY,
    Clause,
    ClauseLabel,
    CorpusSplit,
    Document,
    corpus_stats,
    load_documents,
    parse_annotated_document,
    serialize_document,
    stratified_multilabel_split,
)
from .metrics import (
    FocalLossParams,
    MetricSummary,
    RougeScore,
    focal_loss,
    focal_loss_mean,
    hamming_loss,
    macro_f1,
    mcc_multilabel,
    per_label_f1,
    rouge1,
    t_confidence_interval,
    tokenize,
    weighted_f1,
)
from .pipeline import (
    AggregateReport,
    ClassifiedClause,
    PipelineConfig,
    RunRecord,
    SegmentationOutput,
    aggregate,
    classify_clauses,
    evaluate_classification,
    evaluate_document_level,
    evaluate_segment_level,
    run_batch,
    segment_document,
)
from .semantic import (
    ClaimVerdict,
    FactualCorrectnessResult,
    decompose_claims,
    factual_correctness,
    semantic_similarity,
    verify_claim,
)

__version__ = "0.1.0"
