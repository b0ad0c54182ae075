"""Align predicted clauses against references and pre-filter comparisons.

Run: python3 demos/02_alignment.py
"""

from clausepipe import (
    AlignmentConfig,
    clause_similarity,
    comparison_stats,
    filter_aligned_pairs,
    needleman_wunsch,
)

references = [
    "1. Parties. Acme Corp and Example LLC enter into this agreement.",
    "2. Purpose. The agreement covers the Phoenix integration project.",
    "3. Confidentiality. All shared information shall remain confidential.",
    "4. Term. The obligations survive for five years after termination.",
]

# A model output that merged nothing but split clause 3 into two fragments
# and hallucinated a heading.
predictions = [
    "1. Parties. Acme Corp and Example LLC enter into this agreement.",
    "2. Purpose. The agreement covers the Phoenix integration project.",
    "3. Confidentiality. All shared information",
    "shall remain confidential.",
    "4. Term. The obligations survive for five years after termination.",
]

print("== Pairwise similarity is ROUGE-1 F1 over token bags ==")
print(f"  identical clauses  -> {clause_similarity(references[0], predictions[0]):.3f}")
print(f"  split fragment     -> {clause_similarity(references[2], predictions[2]):.3f}")
print(f"  unrelated clauses  -> {clause_similarity(references[0], predictions[3]):.3f}")

cfg = AlignmentConfig(gap_penalty=-0.25, filter_threshold=0.7)
alignment = needleman_wunsch(references, predictions, cfg)

print("\n== Needleman-Wunsch alignment (monotone, one-to-one) ==")
for pair in alignment.pairs:
    print(f"  ref {pair.ref_index} <-> pred {pair.pred_index}  score={pair.score:.3f}")
print(f"  unmatched refs:  {list(alignment.ref_gaps)}")
print(f"  unmatched preds: {list(alignment.pred_gaps)}  (the stray fragment)")
print(f"  total path score: {alignment.total_score:.3f}")

print("\n== Pre-filter: only pairs above 0.7 get the expensive metrics ==")
kept = filter_aligned_pairs(alignment, cfg.filter_threshold)
stats = comparison_stats(alignment, len(kept))
print(f"  naive comparisons: {stats.naive_pairs} (every ref x every pred)")
print(f"  evaluated pairs:   {stats.evaluated_pairs}")
print(f"  reduction:         {stats.reduction_pct:.1f}%")
