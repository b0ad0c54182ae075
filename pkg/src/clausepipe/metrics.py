"""Backend-free evaluation metrics.

Covers both evaluation stages: lexical overlap (ROUGE-1) for segmentation,
the multi-label classification family (per-label F1, macro/weighted F1,
Hamming loss, flattened MCC), focal loss, and Student's-t confidence
intervals for reporting means over small samples.

All functions are pure; matrices are binary indicator arrays with one row
per instance and one column per label.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import ShapeMismatch, TooFewSamples, ZeroSupport

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Clamp bound for probabilities entering a log().
PROB_EPS = 1e-7


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


class RougeScore(NamedTuple):
    precision: float
    recall: float
    f1: float


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def rouge1(candidate: str, reference: str) -> RougeScore:
    """Unigram-overlap precision/recall/F1 between candidate and reference.

    Overlap counts each unigram at most min(candidate count, reference count)
    times. Both sides empty scores (1, 1, 1); exactly one side empty scores
    (0, 0, 0).
    """
    cand = Counter(tokenize(candidate))
    ref = Counter(tokenize(reference))
    n_cand = sum(cand.values())
    n_ref = sum(ref.values())
    if n_cand == 0 and n_ref == 0:
        return RougeScore(1.0, 1.0, 1.0)
    if n_cand == 0 or n_ref == 0:
        return RougeScore(0.0, 0.0, 0.0)
    overlap = sum(min(count, ref[tok]) for tok, count in cand.items())
    precision = overlap / n_cand
    recall = overlap / n_ref
    return RougeScore(precision, recall, _f1(precision, recall))


def _as_label_matrix(y: Sequence | np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(y)
    if arr.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 indicators")
    return arr.astype(np.int64)


def _check_shapes(y_true, y_pred) -> tuple[np.ndarray, np.ndarray]:
    t = _as_label_matrix(y_true, "y_true")
    p = _as_label_matrix(y_pred, "y_pred")
    if t.shape != p.shape:
        raise ShapeMismatch(f"shape {t.shape} vs {p.shape}")
    return t, p


class LabelScore(NamedTuple):
    precision: float
    recall: float
    f1: float
    support: int


def per_label_f1(y_true, y_pred) -> list[LabelScore]:
    """Binary precision/recall/F1 per label column; zero denominators score 0."""
    t, p = _check_shapes(y_true, y_pred)
    scores = []
    for col in range(t.shape[1]):
        tc, pc = t[:, col], p[:, col]
        tp = int(((tc == 1) & (pc == 1)).sum())
        fp = int(((tc == 0) & (pc == 1)).sum())
        fn = int(((tc == 1) & (pc == 0)).sum())
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        scores.append(LabelScore(precision, recall, _f1(precision, recall), int(tc.sum())))
    return scores


def macro_f1(per_label: Sequence[LabelScore]) -> float:
    """Unweighted mean of per-label F1 over all labels."""
    if not per_label:
        raise ValueError("need at least one label")
    return sum(s.f1 for s in per_label) / len(per_label)


def weighted_f1(per_label: Sequence[LabelScore]) -> float:
    """Per-label F1 averaged with weights proportional to true-label support."""
    total = sum(s.support for s in per_label)
    if total == 0:
        raise ZeroSupport("no label has any true instance")
    return sum(s.support * s.f1 for s in per_label) / total


def hamming_loss(y_true, y_pred) -> float:
    """Fraction of label cells where prediction disagrees with truth."""
    t, p = _check_shapes(y_true, y_pred)
    if t.size == 0:
        raise ShapeMismatch("empty matrices")
    return float((t != p).mean())


def mcc_multilabel(y_true, y_pred) -> float:
    """Matthews correlation over the flattened indicator matrices.

    Any zero factor in the denominator yields 0 by convention.
    """
    t, p = _check_shapes(y_true, y_pred)
    tf, pf = t.ravel(), p.ravel()
    tp = int(((tf == 1) & (pf == 1)).sum())
    tn = int(((tf == 0) & (pf == 0)).sum())
    fp = int(((tf == 0) & (pf == 1)).sum())
    fn = int(((tf == 1) & (pf == 0)).sum())
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom)


@dataclass(frozen=True)
class FocalLossParams:
    alpha: float = 0.25
    gamma: float = 2.0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")


def focal_loss(prob: float, label: int, params: FocalLossParams = FocalLossParams()) -> float:
    """Focal loss for one (probability, binary label) cell.

    With p_t the probability assigned to the true outcome:
    -alpha * (1 - p_t)^gamma * log(p_t). Probabilities are clamped away from
    0 and 1 so the log never diverges.
    """
    prob = min(max(prob, PROB_EPS), 1.0 - PROB_EPS)
    p_t = prob if label == 1 else 1.0 - prob
    return -params.alpha * (1.0 - p_t) ** params.gamma * math.log(p_t)


def focal_loss_mean(
    probs: Iterable[Iterable[float]],
    labels: Iterable[Iterable[int]],
    params: FocalLossParams = FocalLossParams(),
) -> float:
    """Mean focal loss over all (instance, label) cells of a batch."""
    p = np.asarray(probs, dtype=float)
    y = np.asarray(labels, dtype=float)
    if p.shape != y.shape:
        raise ShapeMismatch(f"shape {p.shape} vs {y.shape}")
    if p.size == 0:
        raise ShapeMismatch("empty batch")
    p = np.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    p_t = np.where(y == 1, p, 1.0 - p)
    return float(np.mean(-params.alpha * (1.0 - p_t) ** params.gamma * np.log(p_t)))


def evaluate_label_matrices(y_true, y_pred) -> dict[str, float]:
    """The multi-label metric bundle reported for the classification stage."""
    per_label = per_label_f1(y_true, y_pred)
    return {
        "macro_f1": macro_f1(per_label),
        "weighted_f1": weighted_f1(per_label),
        "hamming_loss": hamming_loss(y_true, y_pred),
        "mcc": mcc_multilabel(y_true, y_pred),
    }


# --- Student's-t confidence intervals ---


def _betacf(a: float, b: float, x: float) -> float:
    # Continued fraction for the incomplete beta function (modified Lentz).
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def _betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_cdf(t: float, df: int) -> float:
    """CDF of Student's t with df degrees of freedom."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * _betainc_reg(df / 2.0, 0.5, x)
    return 1.0 - tail if t > 0 else tail


def t_quantile(p: float, df: int) -> float:
    """Inverse t CDF by bisection, accurate to about 1e-9."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -t_quantile(1.0 - p, df)
    lo, hi = 0.0, 1.0
    while t_cdf(hi, df) < p:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError(f"quantile bracket failed for p={p}, df={df}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class MetricSummary:
    """Mean with a t-interval half-width: the row shape of the report tables."""

    mean: float
    half_width: float
    n: int
    level: float = 0.95
    degenerate: bool = False  # n == 1, half-width not estimable

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "half_width": self.half_width,
            "n": self.n,
            "level": self.level,
            "degenerate": self.degenerate,
        }


def t_confidence_interval(samples: Sequence[float], level: float = 0.95) -> MetricSummary:
    """Mean +/- t-quantile * s / sqrt(n) with the sample (n-1) std deviation."""
    n = len(samples)
    if n < 2:
        raise TooFewSamples(f"need at least 2 samples, got {n}")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    mean = sum(samples) / n
    if all(x == samples[0] for x in samples):
        # Constant samples have zero sample std by definition; computing it
        # through the mean would leave ~1e-16 float noise in the half-width.
        return MetricSummary(mean, 0.0, n, level)
    var = sum((x - mean) ** 2 for x in samples) / (n - 1)
    s = math.sqrt(var)
    if s == 0.0:
        return MetricSummary(mean, 0.0, n, level)
    factor = t_quantile((1.0 + level) / 2.0, n - 1)
    return MetricSummary(mean, factor * s / math.sqrt(n), n, level)


def point_summary(value: float, level: float = 0.95) -> MetricSummary:
    """Single-sample summary, flagged because no interval can be estimated."""
    return MetricSummary(value, 0.0, 1, level, degenerate=True)
