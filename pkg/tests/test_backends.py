from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from clausepipe.backends import (
    BackendConfig,
    ChatRequest,
    ClassificationResponse,
    backend_state,
    chat_complete,
    classify,
    embed,
    register_chat_script,
    register_classify_script,
    register_embedding_table,
    register_oracle_labels,
)
from clausepipe.corpus import extract_delimited_clauses
from clausepipe.errors import (
    BackendError,
    ProtocolError,
    RetriesExhausted,
    TransportError,
)

NO_BACKOFF = dict(backoff_base=0.0)


def segment_request(lines: list[str]) -> ChatRequest:
    doc = "\n".join(lines)
    return ChatRequest("system", f"instructions here\nDOCUMENT:\n{doc}")


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            BackendConfig("mock:x", timeout=0)
        with pytest.raises(ValueError):
            BackendConfig("mock:x", max_retries=-1)
        with pytest.raises(ValueError):
            BackendConfig("mock:x", max_concurrency=0)

    def test_mock_mode_parsing(self):
        assert BackendConfig("mock:echo-segment").mock_mode() == ("echo-segment", {})
        assert BackendConfig("mock:echo-segment:poison=XYZ").mock_mode() == (
            "echo-segment",
            {"poison": "XYZ"},
        )
        assert BackendConfig("mock:script:foo").mock_mode() == ("script:foo", {})

    def test_request_validation(self):
        with pytest.raises(ValueError):
            ChatRequest("s", "u", temperature=-1)
        with pytest.raises(ValueError):
            ChatRequest("s", "u", max_output_tokens=0)

    def test_classification_response_arity(self):
        with pytest.raises(ProtocolError):
            ClassificationResponse(tuple([0.5] * 13))
        with pytest.raises(ProtocolError):
            ClassificationResponse(tuple([0.5] * 13 + [1.5]))


class TestChatMocks:
    def test_echo_segment_wraps_reference_clauses(self):
        cfg = BackendConfig("mock:echo-segment", **NO_BACKOFF)
        lines = ["clause one text", "clause two text", "clause three text"]
        out = chat_complete(cfg, segment_request(lines))
        assert extract_delimited_clauses(out) == lines

    def test_fail_twice_succeeds_on_third_attempt(self):
        cfg = BackendConfig("mock:fail-twice", max_retries=2, **NO_BACKOFF)
        assert chat_complete(cfg, ChatRequest("s", "u")) == "ok"
        state = backend_state(cfg)
        assert len(state.attempts) == 3
        request_ids = {rid for rid, _ in state.attempts}
        assert len(request_ids) == 1

    def test_always_fail_exhausts_retries(self):
        cfg = BackendConfig("mock:always-fail", max_retries=1, **NO_BACKOFF)
        with pytest.raises(RetriesExhausted) as err:
            chat_complete(cfg, ChatRequest("s", "u"))
        assert err.value.attempts == 2
        assert len(backend_state(cfg).attempts) == 2

    def test_no_duplicate_deliveries_after_retries(self):
        cfg = BackendConfig("mock:fail-twice", max_retries=3, **NO_BACKOFF)
        chat_complete(cfg, ChatRequest("s", "u"))
        state = backend_state(cfg)
        assert list(state.deliveries.values()) == [1]

    def test_script_mode(self):
        register_chat_script("shout", lambda req: req.user_content.upper())
        cfg = BackendConfig("mock:script:shout")
        assert chat_complete(cfg, ChatRequest("s", "hello")) == "HELLO"

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            chat_complete(BackendConfig("mock:bogus"), ChatRequest("s", "u"))

    def test_concurrency_high_water_mark(self):
        def slow(req: ChatRequest) -> str:
            time.sleep(0.03)
            return "done"

        register_chat_script("slow", slow)
        cfg = BackendConfig("mock:script:slow", max_concurrency=2, **NO_BACKOFF)
        with ThreadPoolExecutor(max_workers=8) as pool:
            list(pool.map(lambda _: chat_complete(cfg, ChatRequest("s", "u")), range(8)))
        assert backend_state(cfg).high_water <= 2


class TestEmbedMocks:
    def test_hash_embed_deterministic(self):
        cfg = BackendConfig("mock:hash-embed")
        a, b = embed(cfg, ["same text", "same text"])
        assert a.values == b.values

    def test_order_preserved(self):
        cfg = BackendConfig("mock:hash-embed")
        texts = ["first text", "second words", "third thing"]
        vectors = embed(cfg, texts)
        assert len(vectors) == 3
        again = embed(cfg, list(reversed(texts)))
        assert [v.values for v in again] == [v.values for v in reversed(vectors)]

    def test_batching_splits_requests(self):
        cfg = BackendConfig("mock:hash-embed")
        texts = [f"text number {i}" for i in range(130)]
        vectors = embed(cfg, texts)
        assert len(vectors) == 130
        state = backend_state(cfg)
        assert len({rid for rid, _ in state.attempts}) == 2  # 128 + 2

    def test_table_mode(self):
        register_embedding_table("fixed", {"a": [1.0, 0.0], "b": [0.0, 2.0]})
        cfg = BackendConfig("mock:table:fixed")
        u, v = embed(cfg, ["a", "b"])
        assert u.values == (1.0, 0.0) and v.values == (0.0, 2.0)
        with pytest.raises(ProtocolError):
            embed(cfg, ["missing"])

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            embed(BackendConfig("mock:hash-embed"), [])


class TestClassifyMocks:
    def test_keyword_hit(self):
        cfg = BackendConfig("mock:keyword")
        response = classify(cfg, "20. Governing Law. Disputes go to Delaware courts.")
        assert response.probabilities[12] >= 0.9  # label 13

    def test_no_keywords_all_low(self):
        cfg = BackendConfig("mock:keyword")
        response = classify(cfg, "zebra quartz umbrella")
        assert all(p <= 0.1 for p in response.probabilities)

    def test_malformed_arity(self):
        with pytest.raises(ProtocolError):
            classify(BackendConfig("mock:malformed"), "whatever text")

    def test_oracle_lookup(self):
        register_oracle_labels({"Some Clause Text.": {3, 7}})
        cfg = BackendConfig("mock:oracle")
        response = classify(cfg, "some  clause text.")  # normalized match
        assert response.probabilities[2] >= 0.9
        assert response.probabilities[6] >= 0.9
        assert sum(p >= 0.9 for p in response.probabilities) == 2

    def test_script_mode(self):
        register_classify_script("flat", lambda text: [0.5] * 14)
        response = classify(BackendConfig("mock:script:flat"), "x")
        assert response.probabilities == tuple([0.5] * 14)

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            classify(BackendConfig("mock:keyword"), "")


# --- live wire-protocol tests against a local HTTP stub ---


class _StubHandler(BaseHTTPRequestHandler):
    server_version = "stub"
    behaviors: dict = {}
    seen: list = []

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length) or b"{}")
        type(self).seen.append(
            {"path": self.path, "payload": payload, "auth": self.headers.get("Authorization")}
        )
        behavior = type(self).behaviors.get(self.path)
        if callable(behavior):
            behavior = behavior(payload, type(self).seen)
        status, body = behavior
        data = body if isinstance(body, (bytes,)) else json.dumps(body).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_stub():
    class Handler(_StubHandler):
        behaviors = {}
        seen = []

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base_url = f"http://127.0.0.1:{server.server_address[1]}"
    yield base_url, Handler
    server.shutdown()
    thread.join(timeout=2)


class TestHttpTransport:
    def test_chat_wire_shape(self, http_stub):
        base_url, handler = http_stub
        handler.behaviors["/chat/completions"] = (
            200,
            {"choices": [{"message": {"role": "assistant", "content": "split text"}}]},
        )
        cfg = BackendConfig(base_url, model_name="llama", api_key="sekrit", **NO_BACKOFF)
        out = chat_complete(cfg, ChatRequest("sys", "user text", temperature=0.0))
        assert out == "split text"
        request = handler.seen[-1]
        assert request["payload"]["model"] == "llama"
        assert request["payload"]["messages"][0] == {"role": "system", "content": "sys"}
        assert request["payload"]["temperature"] == 0.0
        assert request["auth"] == "Bearer sekrit"

    def test_env_api_key(self, http_stub, monkeypatch):
        base_url, handler = http_stub
        handler.behaviors["/chat/completions"] = (
            200,
            {"choices": [{"message": {"content": "x"}}]},
        )
        monkeypatch.setenv("CLAUSEPIPE_API_KEY", "from-env")
        cfg = BackendConfig(base_url, **NO_BACKOFF)
        chat_complete(cfg, ChatRequest("s", "u"))
        assert handler.seen[-1]["auth"] == "Bearer from-env"

    def test_server_error_retried_then_success(self, http_stub):
        base_url, handler = http_stub

        def flaky(payload, seen):
            failures = sum(1 for s in seen if s["path"] == "/chat/completions")
            if failures <= 2:
                return 500, {"error": "overloaded"}
            return 200, {"choices": [{"message": {"content": "recovered"}}]}

        handler.behaviors["/chat/completions"] = flaky
        cfg = BackendConfig(base_url, max_retries=2, **NO_BACKOFF)
        assert chat_complete(cfg, ChatRequest("s", "u")) == "recovered"

    def test_client_error_not_retried(self, http_stub):
        base_url, handler = http_stub
        handler.behaviors["/chat/completions"] = (404, {"error": "nope"})
        cfg = BackendConfig(base_url, max_retries=3, **NO_BACKOFF)
        with pytest.raises(BackendError) as err:
            chat_complete(cfg, ChatRequest("s", "u"))
        assert err.value.status == 404
        assert len([s for s in handler.seen if s["path"] == "/chat/completions"]) == 1

    def test_malformed_chat_response(self, http_stub):
        base_url, handler = http_stub
        handler.behaviors["/chat/completions"] = (200, {"unexpected": True})
        cfg = BackendConfig(base_url, **NO_BACKOFF)
        with pytest.raises(ProtocolError):
            chat_complete(cfg, ChatRequest("s", "u"))

    def test_embeddings_wire_shape(self, http_stub):
        base_url, handler = http_stub
        handler.behaviors["/embeddings"] = (
            200,
            {
                "data": [
                    {"index": 1, "embedding": [0.0, 1.0]},
                    {"index": 0, "embedding": [1.0, 0.0]},
                ]
            },
        )
        cfg = BackendConfig(base_url, model_name="embedder", **NO_BACKOFF)
        u, v = embed(cfg, ["first", "second"])
        assert u.values == (1.0, 0.0)  # re-ordered by index
        assert v.values == (0.0, 1.0)
        assert handler.seen[-1]["payload"] == {"model": "embedder", "input": ["first", "second"]}

    def test_classify_wire_shape(self, http_stub):
        base_url, handler = http_stub
        handler.behaviors["/classify"] = (200, {"probabilities": [0.1] * 13 + [0.9]})
        cfg = BackendConfig(base_url, **NO_BACKOFF)
        response = classify(cfg, "clause text here")
        assert response.probabilities[-1] == 0.9
        assert handler.seen[-1]["payload"] == {"text": "clause text here"}

    def test_classify_wrong_arity_from_server(self, http_stub):
        base_url, handler = http_stub
        handler.behaviors["/classify"] = (200, {"probabilities": [0.1] * 13})
        cfg = BackendConfig(base_url, **NO_BACKOFF)
        with pytest.raises(ProtocolError):
            classify(cfg, "clause text")

    def test_connection_refused_is_transport_error(self):
        cfg = BackendConfig("http://127.0.0.1:1", max_retries=0, timeout=2, **NO_BACKOFF)
        with pytest.raises((TransportError, RetriesExhausted)):
            chat_complete(cfg, ChatRequest("s", "u"))
