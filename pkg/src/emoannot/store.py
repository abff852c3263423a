"""Line-delimited JSON persistence for annotation records, plus dataset
statistics.

One record per line with a fixed field order, so two runs over the same
inputs produce byte-identical files.

Record fields, in serialization order:

- ``sample_id``: unique id (source clip id)
- ``clues``: the four clue texts (subtitle, audio_tone, visual_expression,
  visual_objective)
- ``pseudo_label``: one of the nine emotion categories
- ``low_confidence``: true when the label is the neutral fallback
- ``peak``: peak_index, peak_score, per_frame_scores
- ``peak_active_aus``: AU codes active at the peak frame
- ``duration``: clip duration in seconds
- ``coarse_description``: template-assembled description
- ``fine_description``: refined description, or null
- ``granularity``: "coarse" or "fine"
- ``provenance``: audit references (source file, refinement audit id)
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Optional

from .au import ActionUnit, EmotionLabel
from .errors import DuplicateSampleIdError, IoFailureError, SchemaViolationError
from .labeling import PeakResult
from .synthesis import ClueBundle


class Granularity(str, Enum):
    COARSE = "coarse"
    FINE = "fine"


@dataclass
class AnnotationRecord:
    sample_id: str
    clues: ClueBundle
    pseudo_label: EmotionLabel
    peak: PeakResult
    duration: float
    coarse_description: str
    fine_description: Optional[str] = None
    granularity: Granularity = Granularity.COARSE
    low_confidence: bool = False
    peak_active_aus: tuple[ActionUnit, ...] = ()
    provenance: tuple[str, ...] = ()

    def validate(self) -> None:
        if self.granularity is Granularity.FINE and not self.fine_description:
            raise ValueError("granularity 'fine' requires fine_description")
        if self.duration < 0:
            raise ValueError(f"duration {self.duration} must be >= 0")

    def to_json_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "clues": {
                "subtitle": self.clues.subtitle,
                "audio_tone": self.clues.audio_tone,
                "visual_expression": self.clues.visual_expression,
                "visual_objective": self.clues.visual_objective,
            },
            "pseudo_label": self.pseudo_label.value,
            "low_confidence": self.low_confidence,
            "peak": {
                "peak_index": self.peak.peak_index,
                "peak_score": self.peak.peak_score,
                "per_frame_scores": [[i, s] for i, s in self.peak.per_frame_scores],
            },
            "peak_active_aus": [au.value for au in self.peak_active_aus],
            "duration": self.duration,
            "coarse_description": self.coarse_description,
            "fine_description": self.fine_description,
            "granularity": self.granularity.value,
            "provenance": list(self.provenance),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "AnnotationRecord":
        try:
            clues = data["clues"]
            peak = data["peak"]
            record = cls(
                sample_id=str(data["sample_id"]),
                clues=ClueBundle(
                    subtitle=str(clues["subtitle"]),
                    audio_tone=str(clues["audio_tone"]),
                    visual_expression=str(clues["visual_expression"]),
                    visual_objective=str(clues["visual_objective"]),
                ),
                pseudo_label=EmotionLabel.parse(data["pseudo_label"]),
                low_confidence=bool(data["low_confidence"]),
                peak=PeakResult(
                    peak_index=int(peak["peak_index"]),
                    peak_score=float(peak["peak_score"]),
                    per_frame_scores=tuple(
                        (int(i), float(s)) for i, s in peak["per_frame_scores"]),
                ),
                peak_active_aus=tuple(
                    ActionUnit.parse(c) for c in data["peak_active_aus"]),
                duration=float(data["duration"]),
                coarse_description=str(data["coarse_description"]),
                fine_description=(None if data["fine_description"] is None
                                  else str(data["fine_description"])),
                granularity=Granularity(data["granularity"]),
                provenance=tuple(str(p) for p in data["provenance"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(str(exc)) from exc
        record.validate()
        return record


def write_records(records: Iterable[AnnotationRecord],
                  sink: str | Path | IO[str]) -> int:
    """Write records as JSONL, one per line; returns the count written."""
    records = list(records)
    seen: set[str] = set()
    for record in records:
        if record.sample_id in seen:
            raise DuplicateSampleIdError(record.sample_id)
        seen.add(record.sample_id)
        record.validate()
    lines = [json.dumps(r.to_json_dict(), ensure_ascii=False) for r in records]
    payload = "".join(line + "\n" for line in lines)
    try:
        if hasattr(sink, "write"):
            sink.write(payload)
        else:
            Path(sink).write_text(payload, encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot write records: {exc}") from exc
    return len(records)


def read_records(source: str | Path | IO[str]) -> list[AnnotationRecord]:
    """Read a JSONL record file; schema errors carry the 1-based line number."""
    try:
        if hasattr(source, "read"):
            text = source.read()
        else:
            text = Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot read records: {exc}") from exc

    records: list[AnnotationRecord] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolationError(line_no, f"invalid JSON: {exc}") from exc
        try:
            records.append(AnnotationRecord.from_json_dict(data))
        except ValueError as exc:
            raise SchemaViolationError(line_no, str(exc)) from exc
    return records


@dataclass
class DatasetStats:
    label_counts: dict[EmotionLabel, int] = field(default_factory=dict)
    duration_histogram: dict[int, int] = field(default_factory=dict)
    au_frequency: dict[ActionUnit, int] = field(default_factory=dict)
    top_aus_per_label: dict[EmotionLabel, list[tuple[ActionUnit, int]]] = field(
        default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "label_counts": {l.value: c for l, c in self.label_counts.items()},
            "duration_histogram": {str(k): v for k, v
                                   in sorted(self.duration_histogram.items())},
            "au_frequency": {au.value: c for au, c in self.au_frequency.items()},
            "top_aus_per_label": {
                l.value: [[au.value, c] for au, c in pairs]
                for l, pairs in self.top_aus_per_label.items()
            },
        }


def compute_stats(records: Iterable[AnnotationRecord]) -> DatasetStats:
    """Label counts, 1-second duration buckets [k, k+1), AU frequency at
    peak frames, and the five most frequent AUs per label."""
    records = list(records)
    label_counts = {label: 0 for label in EmotionLabel}
    au_frequency = {au: 0 for au in ActionUnit}
    duration_histogram: Counter[int] = Counter()
    per_label_au: dict[EmotionLabel, Counter[ActionUnit]] = {
        label: Counter() for label in EmotionLabel}

    for record in records:
        label_counts[record.pseudo_label] += 1
        duration_histogram[int(record.duration)] += 1
        for au in record.peak_active_aus:
            au_frequency[au] += 1
            per_label_au[record.pseudo_label][au] += 1

    top_aus = {
        label: sorted(counter.items(), key=lambda kv: (-kv[1], kv[0].value))[:5]
        for label, counter in per_label_au.items()
    }
    return DatasetStats(label_counts=label_counts,
                        duration_histogram=dict(duration_histogram),
                        au_frequency=au_frequency,
                        top_aus_per_label=top_aus)
