from __future__ import annotations

import pytest

from clausepipe.backends import clear_mock_registries, reset_backend_states
from clausepipe.corpus import Clause, Document, serialize_document

# One clause per label so identity runs score perfectly on every metric,
# spread over 5 documents. Single-line texts keep the echo-segment mock exact.
IDENTITY_CORPUS: list[list[tuple[str, set[int]]]] = [
    [
        ("This agreement is entered into by the parties identified below.", {1}),
        ("The purpose of this agreement covers one specific project.", {2}),
        ("20. Governing Law. This agreement is governed by Delaware law.", {13}),
    ],
    [
        ("The confidentiality obligation is bilateral and binds both parties.", {3}),
        ("Confidential information means any non-public business data.", {4}),
        ("Each receiving party has an obligation to keep the data secret.", {5}),
    ],
    [
        ("Either party may disclose information when required by court order.", {6}),
        ("Information that is publicly available is not considered confidential.", {7}),
        ("Any breach makes the receiving party liable for damages.", {8}),
    ],
    [
        ("Both parties may compete in the same market while honoring secrecy.", {9}),
        ("This agreement may terminate after a period of two years.", {10}),
        ("Nothing in this agreement transfers intellectual property rights.", {11}),
    ],
    [
        ("Employees who accessed the information require prior written notice.", {12}),
        ("Notices must be delivered to the addresses stated in the annex.", {14}),
        ("The annex also lists auditors bound by the same confidentiality obligation.", {5, 14}),
    ],
]


def identity_documents() -> list[Document]:
    docs = []
    for i, spec in enumerate(IDENTITY_CORPUS):
        clauses = tuple(
            Clause(j, text, frozenset(labels)) for j, (text, labels) in enumerate(spec)
        )
        docs.append(Document(id=f"doc{i}", clauses=clauses))
    return docs


def write_identity_corpus(directory) -> list[Document]:
    docs = identity_documents()
    for doc in docs:
        (directory / f"{doc.id}.txt").write_text(serialize_document(doc), encoding="utf-8")
    return docs


@pytest.fixture(autouse=True)
def _fresh_backend_state():
    reset_backend_states()
    clear_mock_registries()
    yield
    reset_backend_states()
    clear_mock_registries()


# --- acceptance summary: one pass/fail line per criterion ---

_acceptance: list[tuple[str, str, bool]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance.append((name, report.outcome, report.passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, _outcome, passed in _acceptance:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")
