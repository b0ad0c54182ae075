"""Backend-dependent segment metrics: semantic similarity and factual correctness.

Semantic similarity is the cosine between the two texts' embedding vectors.
Factual correctness decomposes each side into atomic claims with a judge
model, verifies every claim against the other side by textual inference,
and reports claim-level precision/recall/F1: candidate claims unsupported by
the reference are false positives, reference claims unsupported by the
candidate are false negatives.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .backends import BackendConfig, ChatRequest, chat_complete, embed
from .errors import DegenerateEmbedding, ProtocolError
from .prompts import JUDGE_SYSTEM_PROMPT, load_template

VERDICT_SUPPORTED = "SUPPORTED"
VERDICT_NOT_SUPPORTED = "NOT_SUPPORTED"

_LIST_LINE = re.compile(r"^(?:[-*]|\d+[.)])\s+(.*)$")


def semantic_similarity(a: str, b: str, embed_backend: BackendConfig) -> float:
    """Cosine similarity of the two texts' embeddings, in [-1, 1]."""
    if not a or not b:
        raise ValueError("both texts must be non-empty")
    u, v = embed(embed_backend, [a, b])
    nu = math.sqrt(sum(x * x for x in u.values))
    nv = math.sqrt(sum(x * x for x in v.values))
    if nu == 0.0 or nv == 0.0:
        raise DegenerateEmbedding("zero-norm embedding, cosine undefined")
    if u.values == v.values:
        return 1.0  # identical vectors: skip the round-trip through sqrt
    dot = sum(x * y for x, y in zip(u.values, v.values))
    return max(-1.0, min(1.0, dot / (nu * nv)))


def decompose_claims(
    text: str, judge: BackendConfig, template: str | None = None
) -> list[str]:
    """Ask the judge to list the atomic factual claims contained in text."""
    if not text:
        raise ValueError("text must be non-empty")
    template = template or load_template("decompose")
    raw = chat_complete(
        judge,
        ChatRequest(JUDGE_SYSTEM_PROMPT, template.format(text=text), temperature=0.0),
    )
    claims: list[str] = []
    lines = [line.strip() for line in raw.splitlines() if line.strip()]
    if lines == ["NONE"]:
        return []
    for line in lines:
        m = _LIST_LINE.match(line)
        if m is None:
            raise ProtocolError(f"judge line is not a list item: {line!r}", raw)
        claim = m.group(1).strip()
        if claim:
            claims.append(claim)
    return claims


def verify_claim(
    claim: str,
    context: str,
    judge: BackendConfig,
    template: str | None = None,
    memo: dict[tuple[str, str], bool] | None = None,
) -> bool:
    """Single textual-inference verdict: is the claim supported by the context?"""
    if not claim or not context:
        raise ValueError("claim and context must be non-empty")
    if memo is not None and (claim, context) in memo:
        return memo[(claim, context)]
    template = template or load_template("verify")
    raw = chat_complete(
        judge,
        ChatRequest(
            JUDGE_SYSTEM_PROMPT,
            template.format(claim=claim, context=context),
            temperature=0.0,
        ),
    )
    verdict = raw.strip()
    if verdict == VERDICT_SUPPORTED:
        result = True
    elif verdict == VERDICT_NOT_SUPPORTED:
        result = False
    else:
        raise ProtocolError(f"judge verdict is not a known token: {verdict!r}", raw)
    if memo is not None:
        memo[(claim, context)] = result
    return result


@dataclass(frozen=True)
class ClaimVerdict:
    claim: str
    supported: bool


@dataclass(frozen=True)
class FactualCorrectnessResult:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    candidate_claims: tuple[ClaimVerdict, ...] = field(default_factory=tuple)
    reference_claims: tuple[ClaimVerdict, ...] = field(default_factory=tuple)

    def score(self, mode: str = "f1") -> float:
        if mode not in ("f1", "precision", "recall"):
            raise ValueError(f"unknown score mode {mode!r}")
        return getattr(self, mode)


def factual_correctness(
    candidate: str,
    reference: str,
    judge: BackendConfig,
    memo: dict[tuple[str, str], bool] | None = None,
) -> FactualCorrectnessResult:
    """Claim-level comparison of candidate against reference.

    tp/fp come from verifying the candidate's claims against the reference;
    fn counts reference claims not recoverable from the candidate. Partial
    failures propagate; a result is only returned once every claim has a
    verdict.
    """
    if not candidate or not reference:
        raise ValueError("candidate and reference must be non-empty")
    cand_claims = decompose_claims(candidate, judge)
    ref_claims = decompose_claims(reference, judge)
    cand_verdicts = tuple(
        ClaimVerdict(c, verify_claim(c, reference, judge, memo=memo)) for c in cand_claims
    )
    ref_verdicts = tuple(
        ClaimVerdict(c, verify_claim(c, candidate, judge, memo=memo)) for c in ref_claims
    )
    tp = sum(1 for v in cand_verdicts if v.supported)
    fp = len(cand_verdicts) - tp
    fn = sum(1 for v in ref_verdicts if not v.supported)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 0.0
    return FactualCorrectnessResult(
        tp, fp, fn, precision, recall, f1, cand_verdicts, ref_verdicts
    )
