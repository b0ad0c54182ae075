"""Command-line entry point.

Subcommands wrap the library workflows:

    clausepipe parse INPUT_DIR [--report PATH]
    clausepipe split INPUT_DIR --out DIR [--train-frac F --test-frac F
                                          --val-frac F --seed N]
    clausepipe run --config FILE [overrides]
    clausepipe evaluate --predictions PATH --references DIR [--out DIR]

Exit codes: 0 success, 1 config or I/O error, 2 data/validation error,
3 partial pipeline failure. All randomness flows from the single --seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import pipeline
from .align import AlignmentConfig
from .corpus import (
    Clause,
    CorpusSplit,
    Document,
    corpus_stats,
    parse_annotated_document,
    serialize_document,
    stratified_multilabel_split,
)
from .errors import ClausePipeError, ConfigError, CorpusError
from .pipeline import (
    BatchResult,
    PipelineConfig,
    RunRecord,
    SegmentationOutput,
    aggregate,
    labels_to_row,
    load_config,
    load_records,
    run_batch,
    write_run_outputs,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_PARTIAL = 3


def _parse_directory(input_dir: Path) -> tuple[list[Document], list[tuple[str, str]]]:
    """Parse every .txt file, collecting (filename, error) for failures."""
    docs: list[Document] = []
    failures: list[tuple[str, str]] = []
    for path in sorted(input_dir.glob("*.txt")):
        try:
            docs.append(parse_annotated_document(path.read_text(encoding="utf-8"), path.stem))
        except CorpusError as exc:
            failures.append((path.name, str(exc)))
    return docs, failures


def cmd_parse(args: argparse.Namespace) -> int:
    input_dir = Path(args.input_dir)
    if not input_dir.is_dir():
        print(f"error: {input_dir} is not a directory", file=sys.stderr)
        return EXIT_CONFIG
    try:
        docs, failures = _parse_directory(input_dir)
        stats = corpus_stats(docs)
        report = stats.to_dict()
        report["parse_failures"] = [{"file": f, "error": e} for f, e in failures]
        Path(args.report).write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"parsed {stats.documents} documents, {stats.clauses} clauses -> {args.report}")
    for name, error in failures:
        print(f"parse failure: {name}: {error}", file=sys.stderr)
    return EXIT_DATA if failures else EXIT_OK


def _subset_document(name: str, clauses) -> Document:
    reindexed = tuple(
        Clause(i, c.text, c.labels) for i, c in enumerate(clauses)
    )
    return Document(id=name, clauses=reindexed)


def _label_proportions(clauses) -> dict[str, float]:
    stats = corpus_stats([_subset_document("x", clauses)]) if clauses else None
    if stats is None:
        return {}
    return {l: f for l, f in stats.to_dict()["label_fractions"].items()}


def cmd_split(args: argparse.Namespace) -> int:
    input_dir = Path(args.input_dir)
    if not input_dir.is_dir():
        print(f"error: {input_dir} is not a directory", file=sys.stderr)
        return EXIT_CONFIG
    docs, failures = _parse_directory(input_dir)
    for name, error in failures:
        print(f"parse failure: {name}: {error}", file=sys.stderr)
    if failures:
        return EXIT_DATA
    clauses = [c for doc in docs for c in doc.clauses]
    try:
        split = stratified_multilabel_split(
            clauses,
            train_frac=args.train_frac,
            test_frac=args.test_frac,
            val_frac_of_train=args.val_frac,
            seed=args.seed,
        )
    except (ClausePipeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        manifest = _write_split(out_dir, split, args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sizes = split.sizes()
    print(f"split {len(clauses)} clauses -> train={sizes[0]} val={sizes[1]} test={sizes[2]}")
    print(f"manifest: {manifest}")
    return EXIT_OK


def _write_split(out_dir: Path, split: CorpusSplit, args: argparse.Namespace) -> Path:
    subsets = {"train": split.train, "validation": split.validation, "test": split.test}
    for name, clauses in subsets.items():
        doc = _subset_document(name, clauses)
        (out_dir / f"{name}.txt").write_text(serialize_document(doc), encoding="utf-8")
    manifest = {
        "seed": split.seed,
        "fractions": {
            "train": args.train_frac,
            "test": args.test_frac,
            "val_of_train": args.val_frac,
        },
        "sizes": {name: len(clauses) for name, clauses in subsets.items()},
        "label_proportions": {
            name: _label_proportions(clauses) for name, clauses in subsets.items()
        },
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _apply_overrides(cfg: PipelineConfig, args: argparse.Namespace) -> PipelineConfig:
    replacements = {}
    if args.seed is not None:
        replacements["seed"] = args.seed
    if args.workers is not None:
        replacements["workers"] = args.workers
    if args.out is not None:
        replacements["out_dir"] = args.out
    if args.threshold_filter is not None:
        replacements["filter_threshold"] = args.threshold_filter
    if args.threshold_decision is not None:
        replacements["decision_threshold"] = args.threshold_decision
    for name in ("chat", "classify", "embed", "judge"):
        url = getattr(args, f"backend_{name}_url")
        if url is not None:
            backend = getattr(cfg, name)
            if backend is None:
                raise ConfigError(f"--backend.{name}.url given but config has no {name} backend")
            replacements[name] = dataclasses.replace(backend, base_url=url)
    return dataclasses.replace(cfg, **replacements) if replacements else cfg


def cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        if not cfg.input_dir:
            raise ConfigError("config must set input_dir")
        input_dir = Path(cfg.input_dir)
        if not input_dir.is_dir():
            raise ConfigError(f"input_dir {input_dir} is not a directory")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    docs, failures = _parse_directory(input_dir)
    for name, error in failures:
        print(f"parse failure: {name}: {error}", file=sys.stderr)
    if failures:
        return EXIT_DATA
    if not docs:
        print("error: no documents to run", file=sys.stderr)
        return EXIT_DATA

    run_dir = Path(cfg.out_dir) / cfg.run_id
    existing: list[RunRecord] = []
    records_path = run_dir / "records.jsonl"
    if records_path.exists():
        existing = load_records(records_path)

    result = run_batch(docs, cfg, existing=existing)
    write_run_outputs(run_dir, result)
    report = result.report
    print(report.render_table())
    print(f"run outputs written to {run_dir}")
    if result.skipped:
        print(f"skipped {result.skipped} documents already recorded")
    return EXIT_PARTIAL if report.n_failed else EXIT_OK


def _predictions_from_directory(
    path: Path,
) -> tuple[dict[str, Document], list[tuple[str, str]]]:
    docs, failures = _parse_directory(path)
    return {d.id: d for d in docs}, failures


def _evaluate_predictions(
    predictions: dict[str, Document],
    references: dict[str, Document],
    cfg: PipelineConfig | None,
    level: float,
) -> BatchResult:
    align_cfg = cfg.alignment_config() if cfg else AlignmentConfig()
    embed_backend = cfg.embed if cfg else None
    judge_backend = cfg.judge if cfg else None
    memo: dict = {}
    records = []
    for idx, doc_id in enumerate(sorted(references)):
        ref = references[doc_id]
        pred = predictions[doc_id]
        seg = SegmentationOutput(
            document_id=doc_id,
            predicted_clauses=tuple(c.text for c in pred.clauses),
            raw_model_output=serialize_document(pred),
            input_tokens=0,
            output_tokens=0,
        )
        al, seg_metrics, stats = pipeline.evaluate_segment_level(
            ref, seg, align_cfg, embed_backend, judge_backend, memo
        )
        pair_labels = []
        if any(c.labels for c in pred.clauses):
            for pair in pipeline.filter_aligned_pairs(al, align_cfg.filter_threshold):
                pair_labels.append(
                    {
                        "ref_index": pair.ref_index,
                        "pred_index": pair.pred_index,
                        "ref_labels": labels_to_row(ref.clauses[pair.ref_index].labels),
                        "pred_labels": labels_to_row(pred.clauses[pair.pred_index].labels),
                    }
                )
        records.append(
            RunRecord(
                document_id=doc_id,
                status="complete",
                error=None,
                segmentation=seg,
                classified=(),
                alignment=al,
                document_level_metrics=pipeline.evaluate_document_level(ref, seg),
                segment_level_metrics=seg_metrics,
                pair_labels=tuple(pair_labels),
                comparison=stats,
                timestamps={"started": f"logical:{idx:06d}.0", "finished": f"logical:{idx:06d}.1"},
                backend_meta={"prompt_hash": "offline-evaluate"},
            )
        )
    report = aggregate(records, level)
    return BatchResult(records=tuple(records), report=report, skipped=0)


def cmd_evaluate(args: argparse.Namespace) -> int:
    predictions_path = Path(args.predictions)
    out_dir = Path(args.out)
    cfg: PipelineConfig | None = None
    try:
        if args.config:
            cfg = load_config(args.config)
        if not predictions_path.exists():
            raise ConfigError(f"predictions path {predictions_path} does not exist")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if predictions_path.is_file():
        # Offline re-scoring of an existing run's records.
        records = load_records(predictions_path)
        report = aggregate(records, args.level)
        result = BatchResult(records=tuple(records), report=report, skipped=0)
    else:
        if not args.references:
            print("error: --references is required with a predictions directory", file=sys.stderr)
            return EXIT_CONFIG
        references_path = Path(args.references)
        if not references_path.is_dir():
            print(f"error: {references_path} is not a directory", file=sys.stderr)
            return EXIT_CONFIG
        predictions, pred_failures = _predictions_from_directory(predictions_path)
        references, ref_failures = _predictions_from_directory(references_path)
        for name, error in pred_failures + ref_failures:
            print(f"parse failure: {name}: {error}", file=sys.stderr)
        if pred_failures or ref_failures:
            return EXIT_DATA
        missing = sorted(set(references) - set(predictions))
        orphans = sorted(set(predictions) - set(references))
        if missing or orphans:
            for doc_id in missing:
                print(f"no prediction for document {doc_id}", file=sys.stderr)
            for doc_id in orphans:
                print(f"prediction {doc_id} has no reference", file=sys.stderr)
            return EXIT_DATA
        result = _evaluate_predictions(predictions, references, cfg, args.level)

    try:
        write_run_outputs(out_dir, result)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(result.report.render_table())
    print(f"evaluation written to {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clausepipe",
        description="Segment NDAs into clauses, classify them, and evaluate both stages.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_parse = sub.add_parser("parse", help="parse annotated .txt files and write corpus stats")
    p_parse.add_argument("input_dir", help="directory of annotated .txt documents")
    p_parse.add_argument("--report", default="corpus_stats.json", help="stats JSON output path")
    p_parse.set_defaults(func=cmd_parse)

    p_split = sub.add_parser("split", help="stratified train/validation/test split")
    p_split.add_argument("input_dir", help="directory of annotated .txt documents")
    p_split.add_argument("--out", required=True, help="output directory for subset files")
    p_split.add_argument("--train-frac", type=float, default=0.8)
    p_split.add_argument("--test-frac", type=float, default=0.2)
    p_split.add_argument("--val-frac", type=float, default=0.1,
                         help="validation fraction of the training pool")
    p_split.add_argument("--seed", type=int, default=0)
    p_split.set_defaults(func=cmd_split)

    p_run = sub.add_parser("run", help="segment, classify, evaluate, aggregate")
    p_run.add_argument("--config", required=True, help="pipeline config JSON")
    _add_override_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser("evaluate", help="offline re-scoring of existing predictions")
    p_eval.add_argument("--predictions", required=True,
                        help="records.jsonl of a previous run, or a directory of "
                             "prediction .txt files in the corpus delimiter format")
    p_eval.add_argument("--references", help="directory of annotated reference .txt files")
    p_eval.add_argument("--config", help="optional pipeline config (backends, thresholds)")
    p_eval.add_argument("--out", default="eval-report", help="output directory")
    p_eval.add_argument("--level", type=float, default=0.95, help="confidence level")
    p_eval.set_defaults(func=cmd_evaluate)

    return parser


def _add_override_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help="override the run output directory")
    p.add_argument("--threshold.filter", dest="threshold_filter", type=float, default=None)
    p.add_argument("--threshold.decision", dest="threshold_decision", type=float, default=None)
    for name in ("chat", "classify", "embed", "judge"):
        p.add_argument(
            f"--backend.{name}.url", dest=f"backend_{name}_url", default=None,
            help=f"override the {name} backend base URL (mock:<mode> allowed)",
        )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ClausePipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
