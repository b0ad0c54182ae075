"""Needleman-Wunsch global alignment of predicted vs reference clauses.

Reference clauses index the rows of the dynamic-programming table and
predicted clauses the columns. A pair contributes its similarity score, an
unmatched clause on either side contributes the (non-positive) gap penalty,
and the optimum is recovered by traceback with a fixed tie-break order:
pair > reference gap > predicted gap.

The default similarity is ROUGE-1 F1 over token bags, the same lexical
measure used by the segment-level evaluation, so one similarity notion
drives both alignment and the 0.7 pre-filter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

from .errors import ClausePipeError
from .metrics import rouge1, tokenize


def clause_similarity(a: str, b: str) -> float:
    """ROUGE-1 F1 between two clause texts; two token-empty texts score 0."""
    if not tokenize(a) and not tokenize(b):
        return 0.0
    return rouge1(a, b).f1


SCORERS: dict[str, Callable[[str, str], float]] = {"rouge1": clause_similarity}


def register_scorer(name: str, fn: Callable[[str, str], float]) -> None:
    SCORERS[name] = fn


@dataclass(frozen=True)
class AlignmentConfig:
    gap_penalty: float = -0.25
    filter_threshold: float = 0.7
    scorer: str = "rouge1"

    def __post_init__(self):
        if self.gap_penalty > 0:
            raise ValueError("gap_penalty must be <= 0")
        if not 0.0 <= self.filter_threshold <= 1.0:
            raise ValueError("filter_threshold must be in [0, 1]")
        if self.scorer not in SCORERS:
            raise ValueError(f"unknown scorer {self.scorer!r}")

    def score_fn(self) -> Callable[[str, str], float]:
        return SCORERS[self.scorer]


class AlignedPair(NamedTuple):
    ref_index: int
    pred_index: int
    score: float


@dataclass(frozen=True)
class Alignment:
    pairs: tuple[AlignedPair, ...]
    ref_gaps: tuple[int, ...]
    pred_gaps: tuple[int, ...]
    total_score: float
    n_ref: int
    n_pred: int

    def to_dict(self) -> dict:
        return {
            "pairs": [list(p) for p in self.pairs],
            "ref_gaps": list(self.ref_gaps),
            "pred_gaps": list(self.pred_gaps),
            "total_score": self.total_score,
            "n_ref": self.n_ref,
            "n_pred": self.n_pred,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Alignment":
        return cls(
            pairs=tuple(AlignedPair(int(r), int(p), float(s)) for r, p, s in d["pairs"]),
            ref_gaps=tuple(d["ref_gaps"]),
            pred_gaps=tuple(d["pred_gaps"]),
            total_score=float(d["total_score"]),
            n_ref=int(d["n_ref"]),
            n_pred=int(d["n_pred"]),
        )


def pairwise_scores(
    refs: Sequence[str], preds: Sequence[str], cfg: AlignmentConfig
) -> list[list[float]]:
    """The full |refs| x |preds| similarity matrix under cfg's scorer."""
    score = cfg.score_fn()
    return [[score(r, p) for p in preds] for r in refs]


def dp_table(scores: Sequence[Sequence[float]], gap_penalty: float) -> list[list[float]]:
    """Fill the (n+1) x (m+1) Needleman-Wunsch table for a score matrix."""
    n = len(scores)
    m = len(scores[0]) if n else 0
    table = [[0.0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        table[i][0] = table[i - 1][0] + gap_penalty
    for j in range(1, m + 1):
        table[0][j] = table[0][j - 1] + gap_penalty
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            table[i][j] = max(
                table[i - 1][j - 1] + scores[i - 1][j - 1],
                table[i - 1][j] + gap_penalty,
                table[i][j - 1] + gap_penalty,
            )
    return table


def needleman_wunsch(
    refs: Sequence[str], preds: Sequence[str], cfg: AlignmentConfig = AlignmentConfig()
) -> Alignment:
    """Optimal monotone one-to-one alignment of refs against preds.

    Either side empty yields an all-gaps alignment. Ties during traceback
    prefer pairing, then a reference gap, then a predicted gap.
    """
    n, m = len(refs), len(preds)
    scores = pairwise_scores(refs, preds, cfg) if n and m else [[0.0] * m for _ in range(n)]
    g = cfg.gap_penalty
    table = dp_table(scores, g) if n else [[j * g for j in range(m + 1)]]

    pairs: list[AlignedPair] = []
    ref_gaps: list[int] = []
    pred_gaps: list[int] = []
    i, j = n, m
    while i > 0 or j > 0:
        here = table[i][j]
        if i > 0 and j > 0 and here == table[i - 1][j - 1] + scores[i - 1][j - 1]:
            pairs.append(AlignedPair(i - 1, j - 1, scores[i - 1][j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and here == table[i - 1][j] + g:
            ref_gaps.append(i - 1)
            i -= 1
        else:
            pred_gaps.append(j - 1)
            j -= 1

    return Alignment(
        pairs=tuple(reversed(pairs)),
        ref_gaps=tuple(reversed(ref_gaps)),
        pred_gaps=tuple(reversed(pred_gaps)),
        total_score=table[n][m],
        n_ref=n,
        n_pred=m,
    )


def filter_aligned_pairs(al: Alignment, threshold: float) -> list[AlignedPair]:
    """Pairs whose similarity is strictly above the threshold, order kept."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0, 1]")
    return [p for p in al.pairs if p.score > threshold]


@dataclass(frozen=True)
class ComparisonStats:
    """How many clause comparisons the alignment pre-filter saved."""

    naive_pairs: int
    evaluated_pairs: int
    reduction_pct: float

    def to_dict(self) -> dict:
        return {
            "naive_pairs": self.naive_pairs,
            "evaluated_pairs": self.evaluated_pairs,
            "reduction_pct": self.reduction_pct,
        }


def comparison_stats(al: Alignment, filtered_count: int) -> ComparisonStats:
    if filtered_count > len(al.pairs):
        raise ClausePipeError(
            f"filtered count {filtered_count} exceeds {len(al.pairs)} aligned pairs"
        )
    naive = al.n_ref * al.n_pred
    reduction = 100.0 * (1.0 - filtered_count / naive) if naive > 0 else 0.0
    return ComparisonStats(naive, filtered_count, reduction)
