"""End-to-end batch pipeline: ingest -> filter -> label -> describe ->
coarse synthesis -> optional refinement -> store.

A failed sample is skipped and reported; it never aborts the batch.
Outputs are sorted by sample id, so runs with identical config and a stub
backend produce byte-identical dataset files regardless of worker count.
"""
from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .au import AUPhraseTable, EmotionRuleSet, active_aus, load_table_config
from .backend import AuditLog, TextBackend, backend_from_url, refine_annotation
from .errors import AllSamplesFailedError, ConfigInvalidError, EmoannotError
from .ingest import filter_valid, read_clip
from .labeling import assign_pseudo_label
from .store import AnnotationRecord, Granularity, write_records
from .synthesis import (
    DEFAULT_SUBJECT,
    ClueBundle,
    build_coarse_annotation,
    build_refinement_prompt,
    describe_expression,
)

logger = logging.getLogger(__name__)

STAGES = ("ingest", "filter", "label", "synth", "refine", "store")


@dataclass
class PipelineConfig:
    input_dir: str
    output_path: str
    clues_path: Optional[str] = None
    audit_path: Optional[str] = None
    tables_path: Optional[str] = None
    activation_threshold: float = 1.0
    match_fraction: float = 0.6
    min_confidence: float = 0.8
    backend: str = "stub:"
    refine: bool = True
    workers: int = 1
    seed: int = 0
    max_tokens: int = 512
    timeout: float = 10.0
    max_retries: int = 2
    subject: str = DEFAULT_SUBJECT

    def validate(self) -> None:
        if not 0.0 <= self.activation_threshold <= 5.0:
            raise ConfigInvalidError(
                f"activation_threshold {self.activation_threshold} outside [0, 5]")
        if not 0.0 < self.match_fraction <= 1.0:
            raise ConfigInvalidError(
                f"match_fraction {self.match_fraction} outside (0, 1]")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ConfigInvalidError(
                f"min_confidence {self.min_confidence} outside [0, 1]")
        if self.workers < 1:
            raise ConfigInvalidError("workers must be >= 1")
        if self.max_retries < 0:
            raise ConfigInvalidError("max_retries must be >= 0")
        if not self.input_dir or not self.output_path:
            raise ConfigInvalidError("input_dir and output_path are required")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PipelineConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigInvalidError(f"config is not valid JSON: {exc}") from exc
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigInvalidError(f"unknown config keys: {sorted(unknown)}")
        try:
            config = cls(**data)
        except TypeError as exc:
            raise ConfigInvalidError(str(exc)) from exc
        config.validate()
        return config

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigInvalidError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(text)


@dataclass
class RunReport:
    stage_counts: dict[str, int] = field(default_factory=dict)
    errors: list[dict] = field(default_factory=list)
    records_written: int = 0

    @property
    def failed(self) -> int:
        return len(self.errors)

    def to_json_dict(self) -> dict:
        return {"stage_counts": self.stage_counts, "errors": self.errors,
                "records_written": self.records_written}


class _StageFailure(EmoannotError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


def load_clue_map(path: str | Path) -> dict[str, dict]:
    """Clue file: JSON object mapping clip id to subtitle / audio_tone /
    visual_objective texts."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ConfigInvalidError("clue file must be a JSON object keyed by clip id")
    return data


def process_clip(path: Path, config: PipelineConfig,
                 phrases: AUPhraseTable, rules: EmotionRuleSet,
                 clue_map: dict[str, dict],
                 backend: Optional[TextBackend],
                 audit: Optional[AuditLog]) -> AnnotationRecord:
    """Run one clip through every stage.

    Raises _StageFailure naming the stage that broke.
    """
    stage = "ingest"
    try:
        trace = read_clip(path)
        stage = "filter"
        trace = filter_valid(trace, config.min_confidence)
        stage = "label"
        result = assign_pseudo_label(trace, rules)
        peak_frame = next(f for f in trace.frames
                          if f.frame_index == result.peak.peak_index)
        aus = active_aus(peak_frame, config.activation_threshold)
        stage = "synth"
        expression = describe_expression(aus, phrases, seed=config.seed)
        supplied = clue_map.get(trace.clip_id, {})
        clues = ClueBundle(
            subtitle=str(supplied.get("subtitle", "")),
            audio_tone=str(supplied.get("audio_tone", "")),
            visual_expression=expression,
            visual_objective=str(supplied.get("visual_objective", "")),
        )
        coarse = build_coarse_annotation(clues, subject=config.subject)
        provenance = [f"source:{path.name}"]
        if clues.missing():
            provenance.append("incomplete_clues:" + ",".join(clues.missing()))

        fine = None
        if config.refine and backend is not None:
            stage = "refine"
            prompt = build_refinement_prompt(coarse, result.label)
            fine = refine_annotation(backend, prompt, audit=audit,
                                     max_tokens=config.max_tokens)
            provenance.append(f"refine_audit:{trace.clip_id}")
    except EmoannotError as exc:
        raise _StageFailure(stage, exc) from exc

    return AnnotationRecord(
        sample_id=trace.clip_id,
        clues=clues,
        pseudo_label=result.label,
        peak=result.peak,
        duration=trace.duration,
        coarse_description=coarse,
        fine_description=fine,
        granularity=Granularity.COARSE,
        low_confidence=result.low_confidence,
        peak_active_aus=tuple(sorted(aus)),
        provenance=tuple(provenance),
    )


def _resolve_tables(config: PipelineConfig) -> tuple[AUPhraseTable, EmotionRuleSet]:
    if config.tables_path:
        phrases, loaded = load_table_config(config.tables_path)
        # CLI/config thresholds win over the table file's values.
        rules = EmotionRuleSet(rules=loaded.rules,
                               match_fraction=config.match_fraction,
                               activation_threshold=config.activation_threshold)
        return phrases, rules
    return AUPhraseTable(), EmotionRuleSet(
        match_fraction=config.match_fraction,
        activation_threshold=config.activation_threshold)


def run_pipeline(config: PipelineConfig) -> RunReport:
    """Process every CSV in the input directory into a record file."""
    config.validate()
    input_dir = Path(config.input_dir)
    if not input_dir.is_dir():
        raise ConfigInvalidError(f"input_dir {config.input_dir!r} is not a directory")
    paths = sorted(input_dir.glob("*.csv"))
    if not paths:
        raise AllSamplesFailedError(f"no CSV files in {config.input_dir!r}")

    clue_map = load_clue_map(config.clues_path) if config.clues_path else {}
    phrases, rules = _resolve_tables(config)
    backend_url = os.environ.get("BACKEND_URL", config.backend)
    backend = (backend_from_url(backend_url, timeout=config.timeout,
                                max_retries=config.max_retries)
               if config.refine else None)
    audit = AuditLog(config.audit_path)

    def worker(path: Path) -> AnnotationRecord:
        return process_clip(path, config, phrases, rules, clue_map,
                            backend, audit)

    outcomes: list[tuple[Path, AnnotationRecord | None, _StageFailure | None]] = []
    if config.workers == 1:
        for path in paths:
            try:
                outcomes.append((path, worker(path), None))
            except _StageFailure as exc:
                outcomes.append((path, None, exc))
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = [(path, pool.submit(worker, path)) for path in paths]
            for path, future in futures:
                try:
                    outcomes.append((path, future.result(), None))
                except _StageFailure as exc:
                    outcomes.append((path, None, exc))

    active_stages = [s for s in STAGES[:-1] if s != "refine" or config.refine]
    report = RunReport(stage_counts={s: 0 for s in STAGES})
    succeeded: list[AnnotationRecord] = []
    for path, record, failure in outcomes:
        if failure is not None:
            logger.warning("skipping %s: %s", path.name, failure)
            # stages before the failing one completed
            for stage in active_stages:
                if stage == failure.stage:
                    break
                report.stage_counts[stage] += 1
            report.errors.append({"clip": path.stem, "stage": failure.stage,
                                  "error": str(failure.cause)})
            continue
        for stage in active_stages:
            report.stage_counts[stage] += 1
        succeeded.append(record)

    if not succeeded:
        raise AllSamplesFailedError(
            f"all {len(paths)} samples failed; first error: "
            f"{report.errors[0]['error']}")

    succeeded.sort(key=lambda r: r.sample_id)
    report.records_written = write_records(succeeded, config.output_path)
    report.stage_counts["store"] = report.records_written
    return report
