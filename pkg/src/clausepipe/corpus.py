"""Annotated NDA corpus: delimiter-format parsing, serialization, and splits.

Corpus files are plain UTF-8 text where each clause sits in a block:

    [INIT_CLAUSE]
    20. Governing Law. All questions concerning ...
    [INIT_CLASSE]13[END_CLASSE]
    [END_CLAUSE]

The class payload is a comma-separated list of label ids in 1..14; several
consecutive ``[INIT_CLASSE]n[END_CLASSE]`` tags are also accepted and merged
into one set. A block without any class tag yields an unlabeled clause
(predicted-only material). Text between blocks is ignored, but stray or
nested delimiters are parse errors.
"""

from __future__ import annotations

import json
import random
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    EmptyClauseText,
    EmptyCorpus,
    InvalidLabel,
    UnbalancedDelimiter,
)

INIT_CLAUSE = "[INIT_CLAUSE]"
END_CLAUSE = "[END_CLAUSE]"
INIT_CLASS = "[INIT_CLASSE]"
END_CLASS = "[END_CLASSE]"

#: The 14 clause categories, keyed by id.
LABEL_NAMES: dict[int, str] = {
    1: "Party Identification",
    2: "Purpose",
    3: "NDA Type (Unilateral/Bilateral)",
    4: "Definition of Confidential Information",
    5: "Confidentiality Obligations",
    6: "Authorized Disclosure",
    7: "Non-Confidential Information",
    8: "Liability for Damages",
    9: "Competition Rights",
    10: "Term and Termination",
    11: "Intellectual Property",
    12: "Employees",
    13: "Governing Law and Jurisdiction",
    14: "Additional Information",
}

NUM_LABELS = 14
LABEL_IDS = tuple(range(1, NUM_LABELS + 1))


@dataclass(frozen=True)
class ClauseLabel:
    id: int
    name: str

    def __post_init__(self):
        if self.id not in LABEL_NAMES:
            raise ValueError(f"label id {self.id} outside 1..{NUM_LABELS}")


TAXONOMY: tuple[ClauseLabel, ...] = tuple(
    ClauseLabel(i, LABEL_NAMES[i]) for i in LABEL_IDS
)


@dataclass(frozen=True)
class Clause:
    """One clause: position in its document, verbatim text, label set."""

    index: int
    text: str
    labels: frozenset[int] = frozenset()

    def __post_init__(self):
        trimmed = self.text.strip()
        if not trimmed:
            raise EmptyClauseText(self.index)
        object.__setattr__(self, "text", trimmed)
        object.__setattr__(self, "labels", frozenset(self.labels))
        bad = [l for l in self.labels if l not in LABEL_NAMES]
        if bad:
            raise InvalidLabel(str(bad[0]))


@dataclass(frozen=True)
class Document:
    id: str
    clauses: tuple[Clause, ...]
    raw_text: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        for pos, clause in enumerate(self.clauses):
            if clause.index != pos:
                raise ValueError(
                    f"clause index {clause.index} at position {pos} in {self.id!r}"
                )

    def clause_text(self) -> str:
        """All clause texts joined by single newlines (the annotated content)."""
        return "\n".join(c.text for c in self.clauses)


_MARKER_RE = re.compile(
    re.escape(INIT_CLAUSE)
    + "|"
    + re.escape(END_CLAUSE)
    + "|"
    + re.escape(INIT_CLASS)
    + "|"
    + re.escape(END_CLASS)
)


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def _parse_label_payload(payload: str, text: str, offset: int) -> set[int]:
    labels: set[int] = set()
    tokens = [t.strip() for t in payload.split(",")]
    for token in tokens:
        if not re.fullmatch(r"\d+", token):
            raise InvalidLabel(token, _byte_offset(text, offset))
        value = int(token)
        if value not in LABEL_NAMES:
            raise InvalidLabel(token, _byte_offset(text, offset))
        labels.add(value)
    return labels


def parse_annotated_document(text: str, id: str) -> Document:
    """Parse one delimiter-format file into a Document.

    Raises UnbalancedDelimiter (with byte offset) for stray, unclosed, or
    nested delimiters, InvalidLabel for malformed class payloads, and
    EmptyClauseText for blocks whose content vanishes after tag removal.
    """
    clauses: list[Clause] = []
    pos = 0
    block_start: int | None = None
    block_index = 0
    text_parts: list[str] = []
    labels: set[int] = set()

    while True:
        m = _MARKER_RE.search(text, pos)
        if m is None:
            break
        marker = m.group(0)
        if block_start is None:
            if marker != INIT_CLAUSE:
                raise UnbalancedDelimiter(
                    f"{marker} outside a clause block", _byte_offset(text, m.start())
                )
            block_start = m.start()
            text_parts = []
            labels = set()
            pos = m.end()
        else:
            if marker == INIT_CLAUSE:
                raise UnbalancedDelimiter(
                    f"nested {INIT_CLAUSE}", _byte_offset(text, m.start())
                )
            if marker == END_CLASS:
                raise UnbalancedDelimiter(
                    f"{END_CLASS} without {INIT_CLASS}", _byte_offset(text, m.start())
                )
            if marker == INIT_CLASS:
                text_parts.append(text[pos : m.start()])
                close = text.find(END_CLASS, m.end())
                inner = _MARKER_RE.search(text, m.end())
                if close < 0 or (inner is not None and inner.start() < close):
                    raise UnbalancedDelimiter(
                        f"unclosed {INIT_CLASS}", _byte_offset(text, m.start())
                    )
                labels |= _parse_label_payload(text[m.end() : close], text, m.end())
                pos = close + len(END_CLASS)
            else:  # END_CLAUSE
                text_parts.append(text[pos : m.start()])
                clause_text = "".join(text_parts).strip()
                if not clause_text:
                    raise EmptyClauseText(block_index)
                clauses.append(Clause(block_index, clause_text, frozenset(labels)))
                block_index += 1
                block_start = None
                pos = m.end()

    if block_start is not None:
        raise UnbalancedDelimiter(
            f"unclosed {INIT_CLAUSE}", _byte_offset(text, block_start)
        )
    # raw_text stays unset: the annotated file is not the original NDA text.
    return Document(id=id, clauses=tuple(clauses))


_BLOCK_RE = re.compile(
    re.escape(INIT_CLAUSE) + r"(.*?)" + re.escape(END_CLAUSE), re.DOTALL
)
_CLASS_TAG_RE = re.compile(
    re.escape(INIT_CLASS) + r".*?" + re.escape(END_CLASS), re.DOTALL
)


def extract_delimited_clauses(text: str) -> list[str]:
    """Lenient clause extraction for model output.

    Scans for ``[INIT_CLAUSE] ... [END_CLAUSE]`` spans, ignoring any chatter
    outside them, strips class tags, and drops blocks that end up empty.
    Unlike parse_annotated_document, nothing here raises: garbage in, fewer
    clauses out.
    """
    clauses = []
    for m in _BLOCK_RE.finditer(text):
        body = _CLASS_TAG_RE.sub("", m.group(1)).strip()
        if body:
            clauses.append(body)
    return clauses


def serialize_document(doc: Document) -> str:
    """Inverse of parse_annotated_document over clause texts and label sets."""
    blocks = []
    for clause in doc.clauses:
        lines = [INIT_CLAUSE, clause.text]
        if clause.labels:
            payload = ",".join(str(l) for l in sorted(clause.labels))
            lines.append(f"{INIT_CLASS}{payload}{END_CLASS}")
        lines.append(END_CLAUSE)
        blocks.append("\n".join(lines))
    if not blocks:
        return ""
    return "\n".join(blocks) + "\n"


def load_documents(input_dir: str | Path) -> list[Document]:
    """Parse every .txt file in a directory, in lexicographic filename order."""
    docs = []
    for path in sorted(Path(input_dir).glob("*.txt")):
        docs.append(parse_annotated_document(path.read_text(encoding="utf-8"), path.stem))
    return docs


# --- stratified multi-label splitting ---


@dataclass(frozen=True)
class CorpusSplit:
    train: tuple[Clause, ...]
    validation: tuple[Clause, ...]
    test: tuple[Clause, ...]
    seed: int

    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.validation), len(self.test)


def _iterative_stratify(
    clauses: Sequence[Clause], ratios: Sequence[float], rng: random.Random
) -> list[list[Clause]]:
    """Greedy iterative stratification (rarest label first).

    Examples of the label with the fewest remaining instances are placed
    first, each into the subset with the greatest remaining demand for that
    label; demand counters for every label of the placed example are then
    decremented. Ties fall to the subset with the most remaining global
    capacity, then to a seeded random draw, so the split is deterministic
    for a fixed seed.
    """
    n_subsets = len(ratios)
    remaining: list[Clause] = list(clauses)
    rng.shuffle(remaining)

    label_counts: Counter[int] = Counter()
    for c in remaining:
        label_counts.update(c.labels)

    desired_global = [len(remaining) * r for r in ratios]
    desired = {l: [label_counts[l] * r for r in ratios] for l in label_counts}
    subsets: list[list[Clause]] = [[] for _ in range(n_subsets)]

    def place(clause: Clause, j: int) -> None:
        subsets[j].append(clause)
        desired_global[j] -= 1
        for l in clause.labels:
            desired[l][j] -= 1

    def pick_subset(keys: list[float]) -> int:
        best = max(keys)
        tied = [j for j, k in enumerate(keys) if k == best]
        if len(tied) == 1:
            return tied[0]
        tied2 = [j for j in tied if desired_global[j] == max(desired_global[j] for j in tied)]
        return rng.choice(tied2)

    while remaining:
        with_labels = [c for c in remaining if c.labels]
        if not with_labels:
            # Unlabeled clauses: distribute by remaining global demand.
            for clause in remaining:
                place(clause, pick_subset(desired_global))
            break
        rarest = min(
            {l for c in with_labels for l in c.labels},
            key=lambda l: (sum(1 for c in with_labels if l in c.labels), l),
        )
        batch = [c for c in remaining if rarest in c.labels]
        for clause in batch:
            place(clause, pick_subset(desired[rarest]))
        batch_ids = {id(c) for c in batch}
        remaining = [c for c in remaining if id(c) not in batch_ids]

    return subsets


def stratified_multilabel_split(
    clauses: Sequence[Clause],
    train_frac: float = 0.8,
    test_frac: float = 0.2,
    val_frac_of_train: float = 0.1,
    seed: int = 0,
) -> CorpusSplit:
    """Partition clauses into train/validation/test, preserving label mix.

    The test set is carved out of the full pool at test_frac, then the
    validation set is carved out of the remaining training pool at
    val_frac_of_train. Both phases use iterative stratification, so subset
    sizes can drift a couple of items from the exact fractions while
    per-label proportions stay close to global ones.
    """
    if not clauses:
        raise EmptyCorpus("no clauses to split")
    for name, frac in (("train_frac", train_frac), ("test_frac", test_frac),
                       ("val_frac_of_train", val_frac_of_train)):
        if not 0.0 < frac < 1.0:
            raise ValueError(f"{name} must be in (0, 1), got {frac}")
    if abs(train_frac + test_frac - 1.0) > 1e-9:
        raise ValueError("train_frac + test_frac must equal 1")

    seen = Counter(l for c in clauses for l in c.labels)
    for l in LABEL_IDS:
        if seen[l] == 0:
            warnings.warn(f"label {l} ({LABEL_NAMES[l]}) has zero instances", stacklevel=2)

    rng = random.Random(seed)
    train_pool, test = _iterative_stratify(clauses, [train_frac, test_frac], rng)
    if train_pool:
        train, validation = _iterative_stratify(
            train_pool, [1.0 - val_frac_of_train, val_frac_of_train], rng
        )
    else:
        train, validation = [], []
    return CorpusSplit(tuple(train), tuple(validation), tuple(test), seed)


# --- corpus statistics ---


@dataclass(frozen=True)
class CorpusStats:
    documents: int
    clauses: int
    label_instances: int
    label_counts: dict[int, int] = field(default_factory=dict)

    def label_fractions(self) -> dict[int, float]:
        """Per-label share of all label instances (zeros when corpus empty)."""
        if self.label_instances == 0:
            return {l: 0.0 for l in LABEL_IDS}
        return {l: self.label_counts[l] / self.label_instances for l in LABEL_IDS}

    def to_dict(self) -> dict:
        return {
            "documents": self.documents,
            "clauses": self.clauses,
            "label_instances": self.label_instances,
            "label_counts": {str(l): self.label_counts[l] for l in LABEL_IDS},
            "label_fractions": {str(l): f for l, f in self.label_fractions().items()},
            "label_names": {str(l): LABEL_NAMES[l] for l in LABEL_IDS},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def corpus_stats(docs: Iterable[Document]) -> CorpusStats:
    """Document/clause counts and the per-label frequency histogram."""
    docs = list(docs)
    counts = Counter()
    n_clauses = 0
    for doc in docs:
        for clause in doc.clauses:
            n_clauses += 1
            counts.update(clause.labels)
    label_counts = {l: counts.get(l, 0) for l in LABEL_IDS}
    return CorpusStats(
        documents=len(docs),
        clauses=n_clauses,
        label_instances=sum(label_counts.values()),
        label_counts=label_counts,
    )
