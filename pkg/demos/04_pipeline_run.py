"""Full pipeline on mock backends: segment, classify, evaluate, aggregate.

Everything here runs offline; backends are the deterministic mocks selected
with base_url = "mock:<mode>". Point the same config at real endpoints to run
against live models.

Run: python3 demos/04_pipeline_run.py
"""

import tempfile
from pathlib import Path

from clausepipe import BackendConfig, Clause, Document, PipelineConfig, run_batch
from clausepipe.pipeline import write_run_outputs

references = [
    Document(
        id="nda-001",
        clauses=(
            Clause(0, "1. Parties. Acme Corp and Example LLC enter into this agreement.", frozenset({1})),
            Clause(1, "2. Confidentiality. Each obligation to keep data secret lasts five years.", frozenset({5, 10})),
            Clause(2, "3. Governing Law. Delaware law governs this agreement.", frozenset({13})),
        ),
    ),
    Document(
        id="nda-002",
        clauses=(
            Clause(0, "1. Purpose. The purpose of this agreement is the Phoenix project.", frozenset({2})),
            Clause(1, "2. Intellectual property remains with the disclosing party.", frozenset({11})),
        ),
    ),
]

config = PipelineConfig(
    chat=BackendConfig("mock:echo-segment"),        # segmenter: echoes reference clauses
    classify=BackendConfig("mock:oracle"),          # classifier: knows the gold labels
    embed=BackendConfig("mock:hash-embed"),         # embeddings: hashed token bags
    judge=BackendConfig("mock:verbatim-judge"),     # judge: containment entailment
    workers=2,
    seed=0,
)

print("== Running the two-stage pipeline on 2 documents ==")
result = run_batch(references, config)
print(f"  records: {len(result.records)}, failed: {result.report.n_failed}")

record = result.records[0]
print(f"\n== Run record for {record.document_id} ==")
print(f"  predicted clauses: {len(record.segmentation.predicted_clauses)}")
print(f"  aligned pairs:     {len(record.alignment.pairs)}")
print(f"  document ROUGE-F1: {record.document_level_metrics['rouge_f1']:.3f}")
print(f"  pair labels:       {[sorted(c.labels) for c in record.classified]}")

print("\n== Aggregate report (the tables the evaluation protocol produces) ==")
print(result.report.render_table())

with tempfile.TemporaryDirectory() as tmp:
    run_dir = write_run_outputs(Path(tmp) / "demo-run", result)
    print(f"persisted: {sorted(p.name for p in run_dir.iterdir())}")
    print("records.jsonl first line (truncated):")
    first = (run_dir / "records.jsonl").read_text().splitlines()[0]
    print(" ", first[:120], "...")
