"""AU-based emotion annotation toolkit.

Turns per-frame Action Unit intensity logs into pseudo-labeled,
multimodally described annotation records; evaluates recognition output
(UAR/WAR/WAF, open-vocabulary overlap); scores reasoning overlap through
a judge backend; and curates refined records through an expert voting
service.
"""

from .au import (
    ActionUnit,
    AUPhraseTable,
    EmotionLabel,
    EmotionRuleSet,
    active_aus,
    au_descriptions,
    emotion_rule,
    load_table_config,
)
from .backend import AuditLog, StubBackend, TextGenBackend, refine_annotation
from .ingest import ClipTrace, FrameAUVector, filter_valid, parse_openface_csv
from .instructions import TaskKind, build_training_prompt, sample_instruction
from .judge import JudgeVerdict, OverlapTarget, build_overlap_prompt, parse_judge_response
from .labeling import (
    PeakResult,
    PseudoLabelResult,
    assign_pseudo_label,
    select_peak_frame,
    sum_intensity,
)
from .metrics import (
    ConfusionMatrix,
    OVPrediction,
    confusion_matrix,
    ov_scores,
    uar_war,
    waf,
)
from .pipeline import PipelineConfig, RunReport, run_pipeline
from .review import ReviewBallot, ReviewService, Tally
from .store import (
    AnnotationRecord,
    DatasetStats,
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

__version__ = "0.1.0"

__all__ = [
    "ActionUnit", "AUPhraseTable", "EmotionLabel", "EmotionRuleSet",
    "active_aus", "au_descriptions", "emotion_rule", "load_table_config",
    "AuditLog", "StubBackend", "TextGenBackend", "refine_annotation",
    "ClipTrace", "FrameAUVector", "filter_valid", "parse_openface_csv",
    "TaskKind", "build_training_prompt", "sample_instruction",
    "JudgeVerdict", "OverlapTarget", "build_overlap_prompt",
    "parse_judge_response",
    "PeakResult", "PseudoLabelResult", "assign_pseudo_label",
    "select_peak_frame", "sum_intensity",
    "ConfusionMatrix", "OVPrediction", "confusion_matrix", "ov_scores",
    "uar_war", "waf",
    "PipelineConfig", "RunReport", "run_pipeline",
    "ReviewBallot", "ReviewService", "Tally",
    "AnnotationRecord", "DatasetStats", "Granularity", "compute_stats",
    "read_records", "write_records",
    "ClueBundle", "build_coarse_annotation", "build_refinement_prompt",
    "describe_expression",
]
