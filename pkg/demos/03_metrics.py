"""Tour of the pure metrics: ROUGE-1, multi-label scores, focal loss, t-intervals.

Run: python3 demos/03_metrics.py
"""

import numpy as np

from clausepipe import (
    FocalLossParams,
    focal_loss,
    hamming_loss,
    macro_f1,
    mcc_multilabel,
    per_label_f1,
    rouge1,
    t_confidence_interval,
    weighted_f1,
)

print("== ROUGE-1: unigram overlap ==")
candidate = "the confidential information shall remain protected"
reference = "all confidential information shall remain strictly protected"
score = rouge1(candidate, reference)
print(f"  precision={score.precision:.3f} recall={score.recall:.3f} f1={score.f1:.3f}")

print("\n== Multi-label classification metrics (rows=clauses, cols=14 labels) ==")
rng = np.random.default_rng(0)
y_true = rng.integers(0, 2, size=(40, 14))
y_pred = y_true.copy()
flips = rng.random(y_pred.shape) < 0.08  # a noisy classifier
y_pred = np.where(flips, 1 - y_pred, y_pred)

per = per_label_f1(y_true, y_pred)
print(f"  macro F1    = {macro_f1(per):.3f}   (all labels weighted equally)")
print(f"  weighted F1 = {weighted_f1(per):.3f}   (frequent labels dominate)")
print(f"  Hamming     = {hamming_loss(y_true, y_pred):.3f}   (fraction of wrong cells)")
print(f"  MCC         = {mcc_multilabel(y_true, y_pred):.3f}   (flattened correlation)")

print("\n== Focal loss: down-weights easy examples ==")
params = FocalLossParams(alpha=0.25, gamma=2.0)
for prob in (0.6, 0.9, 0.99):
    print(f"  correct with p={prob:.2f}: focal={focal_loss(prob, 1, params):.6f}"
          f"  bce={focal_loss(prob, 1, FocalLossParams(1.0, 0.0)):.6f}")

print("\n== Student's-t confidence intervals for small samples ==")
samples = [0.93, 0.95, 0.91, 0.97, 0.94]
summary = t_confidence_interval(samples, level=0.95)
print(f"  n={summary.n}: {summary.mean:.3f} +/- {summary.half_width:.4f} (95% CI)")
summary = t_confidence_interval(samples * 4, level=0.95)
print(f"  n={summary.n}: {summary.mean:.3f} +/- {summary.half_width:.4f} "
      "(same spread, more samples, tighter interval)")
