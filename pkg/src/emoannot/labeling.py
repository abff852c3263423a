"""Peak-frame selection and rule-based emotion pseudo-labeling.

The peak frame is the frame maximizing summed AU intensity over the clip.
The pseudo-label is the ruled emotion whose AU combination is sufficiently
active at the peak frame; when nothing matches the clip falls back to
neutral and is flagged low-confidence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .au import ActionUnit, EmotionLabel, EmotionRuleSet, default_rule_set
from .errors import EmptyTraceError
from .ingest import ClipTrace, FrameAUVector


@dataclass(frozen=True)
class PeakResult:
    """Peak frame plus the per-frame score trail that selected it."""

    peak_index: int
    peak_score: float
    per_frame_scores: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class PseudoLabelResult:
    label: EmotionLabel
    rule_score: float
    matched_aus: frozenset[ActionUnit]
    peak: PeakResult
    low_confidence: bool


def sum_intensity(frame: FrameAUVector,
                  au_subset: Optional[Iterable[ActionUnit]] = None) -> float:
    """Summed intensity over the given AUs, or over all AUs present."""
    if au_subset is None:
        return sum(frame.intensities.values())
    return sum(frame.intensities.get(au, 0.0) for au in au_subset)


def select_peak_frame(trace: ClipTrace,
                      au_subset: Optional[Iterable[ActionUnit]] = None) -> PeakResult:
    """Frame with maximal summed intensity; ties go to the smallest index."""
    if not trace.frames:
        raise EmptyTraceError(f"clip {trace.clip_id!r} has no frames")
    subset = set(au_subset) if au_subset is not None else None
    scores = tuple((f.frame_index, sum_intensity(f, subset)) for f in trace.frames)
    peak_index, peak_score = scores[0]
    for index, score in scores[1:]:
        if score > peak_score:
            peak_index, peak_score = index, score
    return PeakResult(peak_index=peak_index, peak_score=peak_score,
                      per_frame_scores=scores)


def _rule_stats(frame: FrameAUVector, rule_aus: tuple[ActionUnit, ...],
                threshold: float) -> tuple[float, float, frozenset[ActionUnit]]:
    """(active fraction, mean intensity over the rule's AUs, active subset)."""
    active = frozenset(au for au in rule_aus
                       if frame.intensities.get(au, 0.0) >= threshold)
    fraction = len(active) / len(rule_aus)
    mean = sum(frame.intensities.get(au, 0.0) for au in rule_aus) / len(rule_aus)
    return fraction, mean, active


def assign_pseudo_label(trace: ClipTrace,
                        rules: EmotionRuleSet | None = None) -> PseudoLabelResult:
    """Label a clip from the AU combination active at its peak frame.

    Among rules whose active fraction reaches ``match_fraction``, the one
    with the highest mean intensity over its AUs wins; score ties break by
    the fixed label order. No match yields neutral / low-confidence.
    """
    rules = rules or default_rule_set()
    peak = select_peak_frame(trace)
    frame = next(f for f in trace.frames if f.frame_index == peak.peak_index)

    best: tuple[EmotionLabel, float, frozenset[ActionUnit]] | None = None
    for label, rule_aus in rules.rules.items():
        fraction, mean, active = _rule_stats(frame, rule_aus,
                                             rules.activation_threshold)
        if fraction < rules.match_fraction:
            continue
        if best is None or mean > best[1] or (mean == best[1]
                                              and label.rank < best[0].rank):
            best = (label, mean, active)

    if best is None:
        return PseudoLabelResult(label=EmotionLabel.NEUTRAL, rule_score=0.0,
                                 matched_aus=frozenset(), peak=peak,
                                 low_confidence=True)
    label, mean, active = best
    return PseudoLabelResult(label=label, rule_score=mean, matched_aus=active,
                             peak=peak, low_confidence=False)
