from __future__ import annotations

import math

import pytest

from clausepipe.backends import (
    BackendConfig,
    backend_state,
    register_chat_script,
    register_embedding_table,
)
from clausepipe.errors import DegenerateEmbedding, ProtocolError, RetriesExhausted
from clausepipe.semantic import (
    decompose_claims,
    factual_correctness,
    semantic_similarity,
    verify_claim,
)

VERBATIM = BackendConfig("mock:verbatim-judge", backoff_base=0.0)
HASH_EMBED = BackendConfig("mock:hash-embed")


class TestSemanticSimilarity:
    def test_identity_is_exactly_one(self):
        text = "the confidentiality obligation survives termination"
        assert semantic_similarity(text, text, HASH_EMBED) == 1.0

    def test_orthogonal_vectors(self):
        register_embedding_table("ortho", {"a": [1.0, 0.0], "b": [0.0, 1.0]})
        cfg = BackendConfig("mock:table:ortho")
        assert semantic_similarity("a", "b", cfg) == pytest.approx(0.0)

    def test_hand_cosine(self):
        register_embedding_table("hand", {"u": [1.0, 1.0, 0.0], "v": [1.0, 0.0, 0.0]})
        cfg = BackendConfig("mock:table:hand")
        assert semantic_similarity("u", "v", cfg) == pytest.approx(1 / math.sqrt(2))

    def test_zero_norm_rejected(self):
        register_embedding_table("zero", {"a": [0.0, 0.0], "b": [1.0, 0.0]})
        cfg = BackendConfig("mock:table:zero")
        with pytest.raises(DegenerateEmbedding):
            semantic_similarity("a", "b", cfg)

    def test_backend_errors_propagate(self):
        cfg = BackendConfig("mock:table:unregistered", max_retries=0, backoff_base=0.0)
        with pytest.raises(ProtocolError):
            semantic_similarity("a", "b", cfg)

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            semantic_similarity("", "b", HASH_EMBED)


class TestDecompose:
    def test_scripted_three_claims(self):
        register_chat_script(
            "three-claims", lambda req: "- claim one\n- claim two\n- claim three"
        )
        cfg = BackendConfig("mock:script:three-claims")
        assert decompose_claims("whatever", cfg) == ["claim one", "claim two", "claim three"]

    def test_numbered_list_accepted(self):
        register_chat_script("numbered", lambda req: "1. first\n2) second")
        cfg = BackendConfig("mock:script:numbered")
        assert decompose_claims("whatever", cfg) == ["first", "second"]

    def test_none_marker_yields_empty(self):
        register_chat_script("none", lambda req: "NONE")
        cfg = BackendConfig("mock:script:none")
        assert decompose_claims("—", cfg) == []

    def test_unparseable_output_raises_with_raw(self):
        register_chat_script("prose", lambda req: "Well, there are several claims here.")
        cfg = BackendConfig("mock:script:prose")
        with pytest.raises(ProtocolError) as err:
            decompose_claims("whatever", cfg)
        assert "several claims" in err.value.raw

    def test_governing_law_style_fixture(self):
        script = (
            "- the agreement is governed by Delaware law\n"
            "- the agreement is interpreted consistent with Section 409A"
        )
        register_chat_script("govlaw", lambda req: script)
        cfg = BackendConfig("mock:script:govlaw")
        claims = decompose_claims("20. Governing Law. ...", cfg)
        assert len(claims) == 2

    def test_verbatim_judge_sentence_split(self):
        text = "First statement here. Second statement there."
        claims = decompose_claims(text, VERBATIM)
        assert claims == ["First statement here", "Second statement there"]


class TestVerify:
    def test_supported_token(self):
        register_chat_script("yes", lambda req: "SUPPORTED")
        assert verify_claim("c", "ctx", BackendConfig("mock:script:yes")) is True

    def test_not_supported_token(self):
        register_chat_script("no", lambda req: "NOT_SUPPORTED")
        assert verify_claim("c", "ctx", BackendConfig("mock:script:no")) is False

    def test_unconstrained_output_rejected(self):
        register_chat_script("chatty", lambda req: "I think it is supported, yes.")
        with pytest.raises(ProtocolError):
            verify_claim("c", "ctx", BackendConfig("mock:script:chatty"))

    def test_verbatim_containment(self):
        context = "The receiving party shall protect all confidential information."
        assert verify_claim("shall protect all confidential", context, VERBATIM) is True
        assert verify_claim("may freely publish secrets", context, VERBATIM) is False

    def test_memo_short_circuits_repeat_verdicts(self):
        memo: dict = {}
        context = "alpha beta gamma"
        verify_claim("alpha beta", context, VERBATIM, memo=memo)
        before = len(backend_state(VERBATIM).attempts)
        verify_claim("alpha beta", context, VERBATIM, memo=memo)
        assert len(backend_state(VERBATIM).attempts) == before


class TestFactualCorrectness:
    def test_identity_scores_one(self):
        text = "The term is two years. Delaware law governs. Notices go to the annex address."
        result = factual_correctness(text, text, VERBATIM)
        assert result.f1 == 1.0
        assert result.fp == result.fn == 0 and result.tp > 0

    def test_zero_supported_claims(self):
        candidate = "Completely unrelated invented content."
        reference = "The quick brown fox jumps over the lazy dog."
        result = factual_correctness(candidate, reference, VERBATIM)
        assert result.precision == 0.0
        assert result.f1 == 0.0

    def test_scripted_counts_fixture(self):
        # Candidate decomposes to 4 claims (3 supported), reference to 5
        # (4 covered): tp=3, fp=1, fn=1, f1=6/8.
        cand_claims = [f"cand claim {i}" for i in range(4)]
        ref_claims = [f"ref claim {i}" for i in range(5)]
        supported = set(cand_claims[:3]) | set(ref_claims[:4])

        def judge(req):
            content = req.user_content
            if content.startswith("TASK: DECOMPOSE"):
                passage = content.partition("\nPASSAGE:\n")[2].strip()
                claims = cand_claims if passage.startswith("CANDIDATE") else ref_claims
                return "\n".join(f"- {c}" for c in claims)
            claim = content.partition("\nCLAIM:\n")[2].partition("\n\nCONTEXT:\n")[0].strip()
            return "SUPPORTED" if claim in supported else "NOT_SUPPORTED"

        register_chat_script("fc-fixture", judge)
        cfg = BackendConfig("mock:script:fc-fixture")
        result = factual_correctness("CANDIDATE text", "REFERENCE text", cfg)
        assert (result.tp, result.fp, result.fn) == (3, 1, 1)
        assert result.f1 == pytest.approx(0.75)
        assert result.precision == pytest.approx(3 / 4)
        assert result.score("precision") == result.precision
        assert result.score("f1") == result.f1

    def test_f1_bounds_and_perfection_condition(self):
        text_a = "Delaware law governs. The term is two years."
        text_b = "Delaware law governs. The term is five years instead."
        result = factual_correctness(text_a, text_b, VERBATIM)
        assert 0.0 <= result.f1 <= 1.0
        assert result.f1 < 1.0  # fp and fn both nonzero here

    def test_removing_supported_claim_never_increases_recall(self):
        reference = "Alpha statement. Beta statement. Gamma statement."
        full = "Alpha statement. Beta statement. Gamma statement."
        reduced = "Alpha statement. Beta statement."
        full_result = factual_correctness(full, reference, VERBATIM)
        reduced_result = factual_correctness(reduced, reference, VERBATIM)
        assert reduced_result.recall <= full_result.recall

    def test_backend_failure_propagates(self):
        cfg = BackendConfig("mock:always-fail", max_retries=0, backoff_base=0.0)
        with pytest.raises(RetriesExhausted):
            factual_correctness("a claim.", "a claim.", cfg)
