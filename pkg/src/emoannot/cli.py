"""Command-line entry point.

Subcommands: run, ingest, label, synth, refine, stats, eval, judge, serve.
Stages compose through the record JSONL format. Exit codes: 0 success,
1 partial or total sample failures, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .au import AUPhraseTable, EmotionRuleSet, active_aus, load_table_config
from .backend import AuditLog, backend_from_url, refine_annotation
from .errors import (
    AllSamplesFailedError,
    ConfigInvalidError,
    EmoannotError,
)
from .ingest import filter_valid, read_clip
from .judge import OverlapTarget, judge_batch
from .labeling import assign_pseudo_label
from .metrics import (
    confusion_matrix,
    ov_scores,
    read_closed_set_csv,
    read_open_vocab_csv,
    uar_war,
    waf_from_matrix,
)
from .pipeline import PipelineConfig, load_clue_map, run_pipeline
from .store import (
    AnnotationRecord,
    Granularity,
    compute_stats,
    read_records,
    write_records,
)
from .synthesis import (
    ClueBundle,
    build_coarse_annotation,
    build_refinement_prompt,
    describe_expression,
)

logger = logging.getLogger("emoannot")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2


def _print_json(data: dict) -> None:
    print(json.dumps(data, indent=2, ensure_ascii=False))


def _resolve_backend_url(explicit: str | None, fallback: str = "stub:") -> str:
    # precedence: CLI flag > BACKEND_URL env > default/config
    if explicit:
        return explicit
    return os.environ.get("BACKEND_URL", fallback)


def _load_tables(path: str | None) -> tuple[AUPhraseTable, EmotionRuleSet]:
    if path:
        return load_table_config(path)
    return AUPhraseTable(), EmotionRuleSet()


def cmd_run(args) -> int:
    config = PipelineConfig.from_file(args.config)
    if args.threshold is not None:
        config.activation_threshold = args.threshold
    if args.match_fraction is not None:
        config.match_fraction = args.match_fraction
    if args.min_confidence is not None:
        config.min_confidence = args.min_confidence
    if args.workers is not None:
        config.workers = args.workers
    if args.seed is not None:
        config.seed = args.seed
    if args.output is not None:
        config.output_path = args.output
    if args.no_refine:
        config.refine = False
    if args.backend is not None:
        config.backend = args.backend
    config.validate()
    report = run_pipeline(config)
    _print_json(report.to_json_dict())
    return EXIT_PARTIAL if report.failed else EXIT_OK


def cmd_ingest(args) -> int:
    """Validate AU CSV files and report per-file outcomes."""
    paths = sorted(Path(args.input).glob("*.csv"))
    if not paths:
        print(f"no CSV files in {args.input}", file=sys.stderr)
        return EXIT_PARTIAL
    report = {"files": [], "ok": 0, "failed": 0}
    for path in paths:
        entry = {"file": path.name}
        try:
            trace = read_clip(path)
            if args.min_confidence is not None:
                trace = filter_valid(trace, args.min_confidence)
            entry.update(status="ok", frames=len(trace.frames),
                         duration=trace.duration,
                         warnings=len(trace.warnings))
            report["ok"] += 1
        except EmoannotError as exc:
            entry.update(status="error", error=str(exc))
            report["failed"] += 1
        report["files"].append(entry)
    _print_json(report)
    return EXIT_PARTIAL if report["failed"] else EXIT_OK


def cmd_label(args) -> int:
    """AU CSVs -> records with peak frame and pseudo-label (no clue texts)."""
    phrases, rules = _load_tables(args.tables)
    rules = EmotionRuleSet(rules=rules.rules,
                           match_fraction=args.match_fraction,
                           activation_threshold=args.threshold)
    paths = sorted(Path(args.input).glob("*.csv"))
    if not paths:
        raise AllSamplesFailedError(f"no CSV files in {args.input!r}")
    records, errors = [], []
    for path in paths:
        try:
            trace = filter_valid(read_clip(path), args.min_confidence)
            result = assign_pseudo_label(trace, rules)
            peak_frame = next(f for f in trace.frames
                              if f.frame_index == result.peak.peak_index)
            aus = active_aus(peak_frame, args.threshold)
            records.append(AnnotationRecord(
                sample_id=trace.clip_id,
                clues=ClueBundle("", "", "", ""),
                pseudo_label=result.label,
                peak=result.peak,
                duration=trace.duration,
                coarse_description="",
                granularity=Granularity.COARSE,
                low_confidence=result.low_confidence,
                peak_active_aus=tuple(sorted(aus)),
                provenance=(f"source:{path.name}",),
            ))
        except EmoannotError as exc:
            logger.warning("skipping %s: %s", path.name, exc)
            errors.append({"clip": path.stem, "error": str(exc)})
    if not records:
        raise AllSamplesFailedError("all samples failed")
    records.sort(key=lambda r: r.sample_id)
    count = write_records(records, args.output)
    _print_json({"records_written": count, "errors": errors})
    return EXIT_PARTIAL if errors else EXIT_OK


def cmd_synth(args) -> int:
    """Fill clue texts and assemble coarse descriptions."""
    phrases, _ = _load_tables(args.tables)
    clue_map = load_clue_map(args.clues) if args.clues else {}
    records = read_records(args.input)
    for record in records:
        supplied = clue_map.get(record.sample_id, {})
        expression = describe_expression(set(record.peak_active_aus), phrases,
                                         seed=args.seed)
        record.clues = ClueBundle(
            subtitle=str(supplied.get("subtitle", record.clues.subtitle)),
            audio_tone=str(supplied.get("audio_tone", record.clues.audio_tone)),
            visual_expression=expression,
            visual_objective=str(supplied.get("visual_objective",
                                              record.clues.visual_objective)),
        )
        record.coarse_description = build_coarse_annotation(
            record.clues, subject=args.subject)
    count = write_records(records, args.output)
    _print_json({"records_written": count})
    return EXIT_OK


def cmd_refine(args) -> int:
    """Generate candidate fine descriptions through the text backend."""
    backend = backend_from_url(_resolve_backend_url(args.backend),
                               timeout=args.timeout,
                               max_retries=args.max_retries)
    audit = AuditLog(args.audit)
    records = read_records(args.input)
    errors = []
    for record in records:
        prompt = build_refinement_prompt(record.coarse_description,
                                         record.pseudo_label)
        try:
            record.fine_description = refine_annotation(
                backend, prompt, audit=audit, max_tokens=args.max_tokens)
            record.provenance = record.provenance + (
                f"refine_audit:{record.sample_id}",)
        except EmoannotError as exc:
            logger.warning("refine failed for %s: %s", record.sample_id, exc)
            errors.append({"sample_id": record.sample_id, "error": str(exc)})
    count = write_records(records, args.output)
    _print_json({"records_written": count, "errors": errors})
    return EXIT_PARTIAL if errors else EXIT_OK


def cmd_stats(args) -> int:
    records = read_records(args.input)
    stats = compute_stats(records)
    payload = stats.to_json_dict()
    if args.output:
        Path(args.output).write_text(
            json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8")
    _print_json(payload)
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.task == "closed":
        rows = read_closed_set_csv(args.input)
        pairs = [(truth, pred) for _, truth, pred in rows]
        m = confusion_matrix(pairs)
        uar, war = uar_war(m)
        payload = {
            "samples": len(pairs),
            "labels": [str(l) for l in m.labels],
            "confusion": [list(row) for row in m.counts],
            "uar": uar,
            "war": war,
            "waf": waf_from_matrix(m),
        }
    else:
        rows = read_open_vocab_csv(args.input)
        scores = ov_scores([ov for _, ov in rows])
        payload = {
            "samples": len(rows),
            "accuracy_s": scores.accuracy_s,
            "recall_s": scores.recall_s,
            "avg": scores.avg,
        }
    _print_json(payload)
    return EXIT_OK


def cmd_judge(args) -> int:
    backend = backend_from_url(_resolve_backend_url(args.backend),
                               timeout=args.timeout,
                               max_retries=args.max_retries)
    audit = AuditLog(args.audit)
    count = judge_batch(args.input, args.output, backend,
                        target=OverlapTarget(args.target), audit=audit)
    _print_json({"scored": count, "output": args.output})
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .review import ReviewService
    from .review_api import create_app

    service = ReviewService(quorum=args.quorum, reopen=args.reopen,
                            log_path=args.log)
    if args.input:
        skipped = 0
        for record in read_records(args.input):
            if not record.fine_description:
                skipped += 1
                continue
            service.enqueue(record)
        if skipped:
            logger.warning("skipped %d records without a refined candidate",
                           skipped)
    app = create_app(service)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emoannot",
        description="AU-based emotion annotation pipeline and evaluation tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--match-fraction", dest="match_fraction", type=float,
                   default=None)
    p.add_argument("--min-confidence", dest="min_confidence", type=float,
                   default=None)
    p.add_argument("--backend", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", default=None)
    p.add_argument("--no-refine", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ingest", help="validate AU CSV files")
    p.add_argument("--input", required=True)
    p.add_argument("--min-confidence", dest="min_confidence", type=float,
                   default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("label", help="peak selection and pseudo-labeling")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--match-fraction", dest="match_fraction", type=float,
                   default=0.6)
    p.add_argument("--min-confidence", dest="min_confidence", type=float,
                   default=0.8)
    p.add_argument("--tables", default=None)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("synth", help="assemble coarse descriptions")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--clues", default=None)
    p.add_argument("--subject", default="The person")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tables", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("refine", help="generate candidate fine descriptions")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--backend", default=None)
    p.add_argument("--audit", default=None)
    p.add_argument("--timeout", type=float, default=10.0)
    p.add_argument("--max-retries", dest="max_retries", type=int, default=2)
    p.add_argument("--max-tokens", dest="max_tokens", type=int, default=512)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval", help="closed-set or open-vocabulary metrics")
    p.add_argument("--task", choices=["closed", "ov"], required=True)
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("judge", help="score description overlap via a judge backend")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--backend", default=None)
    p.add_argument("--target", choices=["clue", "label"], default="clue")
    p.add_argument("--audit", default=None)
    p.add_argument("--timeout", type=float, default=10.0)
    p.add_argument("--max-retries", dest="max_retries", type=int, default=2)
    p.set_defaults(func=cmd_judge)

    p = sub.add_parser("serve", help="run the review/voting HTTP service")
    p.add_argument("--input", default=None,
                   help="record file with refined candidates to enqueue")
    p.add_argument("--log", default=None, help="append-only ballot event log")
    p.add_argument("--quorum", type=int, default=4)
    p.add_argument("--reopen", action="store_true")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigInvalidError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AllSamplesFailedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    except EmoannotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
