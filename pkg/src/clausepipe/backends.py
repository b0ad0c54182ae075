"""Clients for the three external model capabilities, plus offline mocks.

Three capabilities sit behind HTTP/JSON endpoints: chat completion (used by
the segmenter and the judge), embeddings (semantic similarity), and clause
classification. All share one runtime envelope: a per-backend concurrency
cap, idempotent retries with exponential backoff, and a uniform error
taxonomy.

Selecting ``base_url = "mock:<mode>"`` swaps the HTTP transport for a
deterministic in-process mock, so every evaluation path can run with no
network. Mock modes:

chat        echo-segment[:poison=TOK]  wrap the document's lines in clause
                                       delimiters; fail if TOK present
            echo-segment-noisy         same, with chatter around the blocks
            no-delimiters              echo the document with no delimiters
            fail-twice                 TransportError on attempts 1-2
            always-fail                TransportError on every attempt
            verbatim-judge             claim decomposition + containment NLI
            script:<name>              registered callable(request) -> text
embed       hash-embed                 stable hashed bag-of-tokens vectors
            table:<name>               registered text -> vector lookup
classify    keyword                    keyword-triggered probabilities
            oracle                     registered text -> label-set lookup
            malformed                  wrong-arity response (protocol tests)
            script:<name>              registered callable(text) -> probs
"""

from __future__ import annotations

import hashlib
import os
import random
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Sequence

import requests

from .corpus import END_CLAUSE, INIT_CLAUSE, NUM_LABELS
from .errors import (
    BackendError,
    ProtocolError,
    RetriesExhausted,
    Timeout,
    TransportError,
)
from .metrics import tokenize

API_KEY_ENV = "CLAUSEPIPE_API_KEY"

#: Marker line that separates instructions from the document payload in the
#: segmentation prompt; the echo mocks rely on it to recover the payload.
DOCUMENT_SENTINEL = "DOCUMENT:"

EMBED_BATCH_SIZE = 128
HASH_EMBED_DIM = 64


@dataclass(frozen=True)
class BackendConfig:
    base_url: str
    model_name: str = ""
    api_key: str | None = None
    timeout: float = 30.0
    max_retries: int = 2
    max_concurrency: int = 4
    backoff_base: float = 0.5
    backoff_factor: float = 2.0
    backoff_jitter: float = 0.2

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")

    @property
    def is_mock(self) -> bool:
        return self.base_url.startswith("mock:")

    def mock_mode(self) -> tuple[str, dict[str, str]]:
        spec = self.base_url[len("mock:"):]
        parts = spec.split(":")
        mode, params = parts[0], {}
        for part in parts[1:]:
            if "=" in part:
                key, value = part.split("=", 1)
                params[key] = value
            else:
                mode = f"{mode}:{part}"  # e.g. script:<name>, table:<name>
        return mode, params


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    user_content: str
    temperature: float = 0.0
    max_output_tokens: int = 8192

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    model_name: str = ""

    def __post_init__(self):
        if not self.values:
            raise ValueError("embedding must be non-empty")
        if any(v != v or v in (float("inf"), float("-inf")) for v in self.values):
            raise ValueError("embedding entries must be finite")


@dataclass(frozen=True)
class ClassificationResponse:
    probabilities: tuple[float, ...]

    def __post_init__(self):
        if len(self.probabilities) != NUM_LABELS:
            raise ProtocolError(
                f"expected {NUM_LABELS} probabilities, got {len(self.probabilities)}"
            )
        if any(not 0.0 <= p <= 1.0 for p in self.probabilities):
            raise ProtocolError("probabilities must be in [0, 1]")


# --- per-backend runtime state (concurrency cap, retry ledger) ---


class BackendState:
    """Bookkeeping for one backend: semaphore plus a mock-visible ledger."""

    def __init__(self, cfg: BackendConfig):
        self.semaphore = threading.Semaphore(cfg.max_concurrency)
        self.lock = threading.Lock()
        self.in_flight = 0
        self.high_water = 0
        self.attempts: list[tuple[str, int]] = []  # (request_id, attempt_no)
        self.deliveries: dict[str, int] = {}  # request_id -> deliveries

    def enter(self, request_id: str, attempt: int) -> None:
        with self.lock:
            self.in_flight += 1
            self.high_water = max(self.high_water, self.in_flight)
            self.attempts.append((request_id, attempt))

    def leave(self) -> None:
        with self.lock:
            self.in_flight -= 1

    def delivered(self, request_id: str) -> None:
        with self.lock:
            self.deliveries[request_id] = self.deliveries.get(request_id, 0) + 1

    def attempt_count(self, request_id: str) -> int:
        with self.lock:
            return sum(1 for rid, _ in self.attempts if rid == request_id)


_STATES: dict[BackendConfig, BackendState] = {}
_STATES_LOCK = threading.Lock()


def backend_state(cfg: BackendConfig) -> BackendState:
    with _STATES_LOCK:
        state = _STATES.get(cfg)
        if state is None:
            state = _STATES[cfg] = BackendState(cfg)
        return state


def reset_backend_states() -> None:
    """Drop all runtime ledgers (test isolation)."""
    with _STATES_LOCK:
        _STATES.clear()


def _is_retryable(exc: Exception) -> bool:
    if isinstance(exc, (Timeout, TransportError)):
        return True
    return isinstance(exc, BackendError) and exc.status >= 500


def _with_retries(cfg: BackendConfig, fn: Callable[[str, int, BackendState], object]):
    state = backend_state(cfg)
    request_id = uuid.uuid4().hex
    attempt = 0
    while True:
        attempt += 1
        try:
            with state.semaphore:
                state.enter(request_id, attempt)
                try:
                    result = fn(request_id, attempt, state)
                finally:
                    state.leave()
        except Exception as exc:
            if not _is_retryable(exc):
                raise
            if attempt > cfg.max_retries:
                raise RetriesExhausted(request_id, attempt, exc) from exc
            # Back off outside the semaphore so waiting is not in-flight time.
            delay = cfg.backoff_base * cfg.backoff_factor ** (attempt - 1)
            if delay > 0:
                delay *= 1.0 + cfg.backoff_jitter * random.uniform(-1.0, 1.0)
                time.sleep(delay)
            continue
        state.delivered(request_id)
        return result


# --- script/table registries used by the mock transports ---

_CHAT_SCRIPTS: dict[str, Callable[[ChatRequest], str]] = {}
_EMBED_TABLES: dict[str, dict[str, Sequence[float]]] = {}
_CLASSIFY_SCRIPTS: dict[str, Callable[[str], Sequence[float]]] = {}
_ORACLE_LABELS: dict[str, frozenset[int]] = {}


def register_chat_script(name: str, fn: Callable[[ChatRequest], str]) -> None:
    _CHAT_SCRIPTS[name] = fn


def register_embedding_table(name: str, table: dict[str, Sequence[float]]) -> None:
    _EMBED_TABLES[name] = table


def register_classify_script(name: str, fn: Callable[[str], Sequence[float]]) -> None:
    _CLASSIFY_SCRIPTS[name] = fn


def register_oracle_labels(mapping: dict[str, set[int] | frozenset[int]]) -> None:
    """Teach the ``mock:oracle`` classifier the true labels for clause texts."""
    for text, labels in mapping.items():
        _ORACLE_LABELS[_normalize(text)] = frozenset(labels)


def clear_mock_registries() -> None:
    _CHAT_SCRIPTS.clear()
    _EMBED_TABLES.clear()
    _CLASSIFY_SCRIPTS.clear()
    _ORACLE_LABELS.clear()


def _normalize(text: str) -> str:
    return " ".join(text.split()).lower()


# --- chat ---


def _extract_document_payload(user_content: str) -> str:
    marker = f"\n{DOCUMENT_SENTINEL}\n"
    pos = user_content.rfind(marker)
    if pos < 0:
        return user_content
    return user_content[pos + len(marker):]


def _wrap_clause_blocks(lines: Sequence[str]) -> str:
    return "\n".join(f"{INIT_CLAUSE}\n{line}\n{END_CLAUSE}" for line in lines)


_CLAIM_LINE = re.compile(r"^(?:[-*]|\d+[.)])\s+")


def _split_into_claims(text: str) -> list[str]:
    parts: list[str] = []
    for line in text.splitlines():
        for piece in re.split(r"(?<=\.)\s+", line):
            piece = piece.strip().rstrip(".")
            if piece:
                parts.append(piece)
    return parts


def _verbatim_judge(req: ChatRequest) -> str:
    content = req.user_content
    if content.startswith("TASK: DECOMPOSE"):
        _, _, passage = content.partition("\nPASSAGE:\n")
        claims = _split_into_claims(passage)
        if not claims:
            return "NONE"
        return "\n".join(f"- {c}" for c in claims)
    if content.startswith("TASK: VERIFY"):
        _, _, rest = content.partition("\nCLAIM:\n")
        claim, _, context = rest.partition("\n\nCONTEXT:\n")
        supported = _normalize(claim) in _normalize(context)
        return "SUPPORTED" if supported else "NOT_SUPPORTED"
    raise ProtocolError("verbatim-judge received an unrecognized prompt", content)


def _mock_chat(cfg: BackendConfig, req: ChatRequest, request_id: str,
               attempt: int, state: BackendState) -> str:
    mode, params = cfg.mock_mode()
    if mode == "always-fail":
        raise TransportError(f"mock always-fail (request {request_id})")
    if mode == "fail-twice":
        if state.attempt_count(request_id) <= 2:
            raise TransportError(f"mock fail-twice attempt {attempt}")
        return "ok"
    if mode in ("echo-segment", "echo-segment-noisy"):
        payload = _extract_document_payload(req.user_content)
        poison = params.get("poison")
        if poison and poison in payload:
            raise TransportError(f"mock poisoned on {poison!r}")
        lines = [line.strip() for line in payload.splitlines() if line.strip()]
        body = _wrap_clause_blocks(lines)
        if mode == "echo-segment-noisy":
            return f"Sure, here are the clauses you asked for:\n{body}\nThat is every clause."
        return body
    if mode == "no-delimiters":
        return _extract_document_payload(req.user_content).strip()
    if mode == "verbatim-judge":
        return _verbatim_judge(req)
    if mode.startswith("script:"):
        name = mode[len("script:"):]
        if name not in _CHAT_SCRIPTS:
            raise ProtocolError(f"no chat script registered under {name!r}")
        return _CHAT_SCRIPTS[name](req)
    raise ValueError(f"unknown chat mock mode {mode!r}")


def _api_key(cfg: BackendConfig) -> str | None:
    return cfg.api_key or os.environ.get(API_KEY_ENV)


def _http_post(cfg: BackendConfig, path: str, payload: dict) -> dict:
    headers = {"Content-Type": "application/json"}
    key = _api_key(cfg)
    if key:
        headers["Authorization"] = f"Bearer {key}"
    try:
        resp = requests.post(
            cfg.base_url.rstrip("/") + path, json=payload,
            headers=headers, timeout=cfg.timeout,
        )
    except requests.Timeout as exc:
        raise Timeout(str(exc)) from exc
    except requests.RequestException as exc:
        raise TransportError(str(exc)) from exc
    if not 200 <= resp.status_code < 300:
        raise BackendError(resp.status_code, resp.text)
    try:
        return resp.json()
    except ValueError as exc:
        raise ProtocolError(f"non-JSON response: {exc}", resp.text) from exc


def _http_chat(cfg: BackendConfig, req: ChatRequest) -> str:
    data = _http_post(cfg, "/chat/completions", {
        "model": cfg.model_name,
        "messages": [
            {"role": "system", "content": req.system_prompt},
            {"role": "user", "content": req.user_content},
        ],
        "temperature": req.temperature,
        "max_tokens": req.max_output_tokens,
    })
    try:
        content = data["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise ProtocolError(f"malformed chat response: {exc}", str(data)) from exc
    if not isinstance(content, str):
        raise ProtocolError("chat content is not a string", str(data))
    return content


def chat_complete(cfg: BackendConfig, req: ChatRequest) -> str:
    """Run one chat completion, retrying transient failures with backoff."""

    def attempt(request_id: str, attempt_no: int, state: BackendState) -> str:
        if cfg.is_mock:
            return _mock_chat(cfg, req, request_id, attempt_no, state)
        return _http_chat(cfg, req)

    return _with_retries(cfg, attempt)


# --- embeddings ---


def _hash_embed(text: str) -> tuple[float, ...]:
    vec = [0.0] * HASH_EMBED_DIM
    for token in tokenize(text):
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        idx = int.from_bytes(digest[:4], "big") % HASH_EMBED_DIM
        vec[idx] += 1.0
    return tuple(vec)


def _mock_embed(cfg: BackendConfig, texts: Sequence[str]) -> list[EmbeddingVector]:
    mode, _ = cfg.mock_mode()
    if mode == "always-fail":
        raise TransportError("mock always-fail")
    if mode == "hash-embed":
        return [EmbeddingVector(_hash_embed(t), cfg.model_name) for t in texts]
    if mode.startswith("table:"):
        name = mode[len("table:"):]
        table = _EMBED_TABLES.get(name)
        if table is None:
            raise ProtocolError(f"no embedding table registered under {name!r}")
        out = []
        for t in texts:
            if t not in table:
                raise ProtocolError(f"text not in embedding table {name!r}: {t[:40]!r}")
            out.append(EmbeddingVector(tuple(float(v) for v in table[t]), cfg.model_name))
        return out
    raise ValueError(f"unknown embed mock mode {mode!r}")


def _http_embed(cfg: BackendConfig, texts: Sequence[str]) -> list[EmbeddingVector]:
    data = _http_post(cfg, "/embeddings", {"model": cfg.model_name, "input": list(texts)})
    try:
        items = sorted(data["data"], key=lambda d: d["index"])
        vectors = [
            EmbeddingVector(tuple(float(v) for v in item["embedding"]), cfg.model_name)
            for item in items
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"malformed embeddings response: {exc}", str(data)) from exc
    if len(vectors) != len(texts):
        raise ProtocolError(f"expected {len(texts)} embeddings, got {len(vectors)}")
    return vectors


def embed(cfg: BackendConfig, texts: Sequence[str]) -> list[EmbeddingVector]:
    """Embed texts in order, batching into requests of at most 128 texts."""
    if not texts:
        raise ValueError("texts must be non-empty")
    out: list[EmbeddingVector] = []
    for start in range(0, len(texts), EMBED_BATCH_SIZE):
        batch = list(texts[start : start + EMBED_BATCH_SIZE])

        def attempt(request_id: str, attempt_no: int, state: BackendState,
                    batch=batch) -> list[EmbeddingVector]:
            if cfg.is_mock:
                return _mock_embed(cfg, batch)
            return _http_embed(cfg, batch)

        out.extend(_with_retries(cfg, attempt))
    return out


# --- classification ---

#: Keyword triggers for the mock classifier, one-ish per taxonomy class.
KEYWORD_LABELS: dict[str, int] = {
    "entered into by": 1,
    "between the parties identified": 1,
    "purpose of this agreement": 2,
    "bilateral": 3,
    "unilateral": 3,
    "confidential information means": 4,
    "defined as confidential": 4,
    "obligation": 5,
    "shall keep confidential": 5,
    "court order": 6,
    "authorized to disclose": 6,
    "publicly available": 7,
    "not considered confidential": 7,
    "damages": 8,
    "liable": 8,
    "compete": 9,
    "same market": 9,
    "termination": 10,
    "terminate": 10,
    "intellectual property": 11,
    "employee": 12,
    "governing law": 13,
    "jurisdiction": 13,
}

MOCK_PROB_HIGH = 0.95
MOCK_PROB_LOW = 0.05


def _mock_classify(cfg: BackendConfig, text: str) -> ClassificationResponse:
    mode, _ = cfg.mock_mode()
    if mode == "always-fail":
        raise TransportError("mock always-fail")
    if mode == "keyword":
        probs = [MOCK_PROB_LOW] * NUM_LABELS
        lowered = text.lower()
        for keyword, label in KEYWORD_LABELS.items():
            if keyword in lowered:
                probs[label - 1] = MOCK_PROB_HIGH
        return ClassificationResponse(tuple(probs))
    if mode == "oracle":
        labels = _ORACLE_LABELS.get(_normalize(text), frozenset())
        probs = [MOCK_PROB_HIGH if l in labels else MOCK_PROB_LOW
                 for l in range(1, NUM_LABELS + 1)]
        return ClassificationResponse(tuple(probs))
    if mode == "malformed":
        return ClassificationResponse(tuple([0.5] * (NUM_LABELS - 1)))
    if mode.startswith("script:"):
        name = mode[len("script:"):]
        if name not in _CLASSIFY_SCRIPTS:
            raise ProtocolError(f"no classify script registered under {name!r}")
        return ClassificationResponse(tuple(float(p) for p in _CLASSIFY_SCRIPTS[name](text)))
    raise ValueError(f"unknown classify mock mode {mode!r}")


def _http_classify(cfg: BackendConfig, text: str) -> ClassificationResponse:
    data = _http_post(cfg, "/classify", {"text": text})
    try:
        probs = tuple(float(p) for p in data["probabilities"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"malformed classification response: {exc}", str(data)) from exc
    return ClassificationResponse(probs)


def classify(cfg: BackendConfig, clause_text: str) -> ClassificationResponse:
    """Fetch the 14 per-label probabilities for one clause."""
    if not clause_text:
        raise ValueError("clause_text must be non-empty")

    def attempt(request_id: str, attempt_no: int, state: BackendState) -> ClassificationResponse:
        if cfg.is_mock:
            return _mock_classify(cfg, clause_text)
        return _http_classify(cfg, clause_text)

    return _with_retries(cfg, attempt)
