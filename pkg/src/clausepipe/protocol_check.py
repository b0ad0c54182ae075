"""Conformance check for the classification wire contract.

Any service claiming to implement the classification endpoint
(``POST /classify`` with ``{"text": ...}`` returning ``{"probabilities":
[14 floats in 0..1]}``) can be validated against this module, either from
tests or from the command line:

    python -m clausepipe.protocol_check http://localhost:8414

Exit code 0 means the endpoint conforms; 1 lists the violations.
"""

from __future__ import annotations

import sys

from .backends import BackendConfig, classify
from .corpus import NUM_LABELS
from .errors import BackendError, BackendFailure, ProtocolError

_SAMPLE_CLAUSE = (
    "20. Governing Law. All questions concerning the construction, validity "
    "and interpretation of this Agreement will be governed by the laws of the "
    "State of Delaware."
)


def check_classification_protocol(cfg: BackendConfig) -> list[str]:
    """Probe the endpoint; returns a list of problems (empty = conformant)."""
    problems: list[str] = []

    try:
        first = classify(cfg, _SAMPLE_CLAUSE)
        if len(first.probabilities) != NUM_LABELS:
            problems.append(f"expected {NUM_LABELS} probabilities")
        second = classify(cfg, _SAMPLE_CLAUSE)
        if first.probabilities != second.probabilities:
            problems.append("endpoint is not deterministic for identical input")
    except ProtocolError as exc:
        problems.append(f"malformed response: {exc}")
    except BackendFailure as exc:
        problems.append(f"request failed: {exc}")
        return problems

    # Empty text must be rejected, not scored. The client refuses to send
    # empty text, so probe live endpoints directly; mocks have no wire side.
    if not cfg.is_mock:
        try:
            import requests

            resp = requests.post(
                cfg.base_url.rstrip("/") + "/classify", json={"text": ""}, timeout=cfg.timeout
            )
            if resp.status_code != 400:
                problems.append(f"empty text returned HTTP {resp.status_code}, expected 400")
        except requests.RequestException as exc:
            problems.append(f"empty-text probe failed: {exc}")

    return problems


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m clausepipe.protocol_check <base_url>", file=sys.stderr)
        return 2
    cfg = BackendConfig(base_url=argv[0], timeout=10.0, max_retries=0)
    problems = check_classification_protocol(cfg)
    if problems:
        for p in problems:
            print(f"FAIL: {p}")
        return 1
    print("classification endpoint conforms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
