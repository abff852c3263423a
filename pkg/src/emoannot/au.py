"""Action Unit domain model: codes, emotion rules, and phrase tables.

The tables ship as embedded constants and may be overridden by a JSON
configuration file with the shape::

    {"rules": {label: [AU codes]}, "phrases": {AU code: [strings]},
     "match_fraction": number, "activation_threshold": number}
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Mapping, Optional

if TYPE_CHECKING:
    from .ingest import FrameAUVector


class ActionUnit(str, Enum):
    """Facial Action Unit codes (closed set)."""

    AU01 = "AU01"
    AU02 = "AU02"
    AU04 = "AU04"
    AU05 = "AU05"
    AU06 = "AU06"
    AU07 = "AU07"
    AU09 = "AU09"
    AU10 = "AU10"
    AU12 = "AU12"
    AU14 = "AU14"
    AU15 = "AU15"
    AU17 = "AU17"
    AU20 = "AU20"
    AU23 = "AU23"
    AU25 = "AU25"
    AU26 = "AU26"
    AU28 = "AU28"

    @classmethod
    def parse(cls, code: str) -> "ActionUnit":
        try:
            return cls(code)
        except ValueError:
            raise ValueError(f"unknown AU code {code!r}") from None


class EmotionLabel(str, Enum):
    """The nine emotion categories. Definition order is the canonical
    tie-breaking order and must not be rearranged."""

    NEUTRAL = "neutral"
    HAPPY = "happy"
    ANGRY = "angry"
    WORRIED = "worried"
    SURPRISE = "surprise"
    SAD = "sad"
    FEAR = "fear"
    DOUBT = "doubt"
    CONTEMPT = "contempt"

    @classmethod
    def parse(cls, name: str) -> "EmotionLabel":
        try:
            return cls(name)
        except ValueError:
            raise ValueError(f"unknown emotion label {name!r}") from None

    @property
    def rank(self) -> int:
        return _LABEL_RANK[self]


_LABEL_RANK = {label: i for i, label in enumerate(EmotionLabel)}

# Canonical phrase variants per AU. Index 0 is the primary descriptor.
AU_PHRASES: dict[ActionUnit, tuple[str, ...]] = {
    ActionUnit.AU01: ("Inner brow raiser", "Frown", "Eyebrow raised",
                      "Head lifting wrinkles", "Lift eyebrows"),
    ActionUnit.AU02: ("Outer brow raiser", "Outer brow lift",
                      "Elevate outer brow", "Outer brow arch"),
    ActionUnit.AU04: ("Brow Lowerer", "Frowns furrowed", "Lower eyebrows",
                      "A look of disapprroval"),
    ActionUnit.AU05: ("Upper Lid Raiser", "Pupil enlargement", "Eyes widened",
                      "Lift upper eyelids", "Raise upper eyelids"),
    ActionUnit.AU06: ("Cheek Raiser", "smile, Pleasure",
                      "Slight decrease in eyebrows", "Eyes narrowing",
                      "Slightly lower eyebrows"),
    ActionUnit.AU07: ("Lid Tightener", "Facial tightness",
                      "Tightening of eyelids"),
    ActionUnit.AU09: ("Nose Wrinkler", "Wrinkle the nose", "Curl the nose",
                      "Make a face", "Pucker the nose"),
    ActionUnit.AU10: ("Upper Lip Raiser", "Curl the lips upwards",
                      "Upper lip lift", "Lips apart showing teeth"),
    ActionUnit.AU12: ("Lip Corner Puller", "Toothy smile", "Grinning",
                      "Big smile", "Show teeth"),
    ActionUnit.AU14: ("Dimpler", "Cheek dimple", "Indentation when smiling",
                      "Hollow on the face when smiling"),
    ActionUnit.AU15: ("Lip Corner Depressor", "Downturned corners of the mouth",
                      "Downward mouth curvature", "Lower Lip Depressor"),
    ActionUnit.AU17: ("Chin Raiser", "Lift the chin", "Chin held high",
                      "Lips arching", "Lips forming an upward curve"),
    ActionUnit.AU20: ("Lip stretcher", "Tense lips stretched",
                      "Anxiously stretched lips", "Nasal flaring",
                      "Nostrils enlarge"),
    ActionUnit.AU23: ("Lip Tightener", "Tighten the lips", "Purse the lips",
                      "Press the lips together"),
    ActionUnit.AU25: ("Lips part", "Open the lips", "Slightly puzzled",
                      "lips slightly parted"),
    ActionUnit.AU26: ("Jaw Drop", "Mouth Stretch", "Open mouth wide",
                      "Wide-mouthed", "Lips elongated"),
    ActionUnit.AU28: ("Lip Suck", "Purse lips", "Pucker lips", "Draw in lips",
                      "Bring lips together"),
}

# AU combinations characteristic of each emotion. Neutral has no rule:
# it is the fallback when nothing matches with sufficient intensity.
EMOTION_RULES: dict[EmotionLabel, tuple[ActionUnit, ...]] = {
    EmotionLabel.HAPPY: (ActionUnit.AU06, ActionUnit.AU12, ActionUnit.AU14),
    EmotionLabel.ANGRY: (ActionUnit.AU04, ActionUnit.AU05, ActionUnit.AU07,
                         ActionUnit.AU23, ActionUnit.AU10, ActionUnit.AU17),
    EmotionLabel.WORRIED: (ActionUnit.AU28, ActionUnit.AU20),
    EmotionLabel.SURPRISE: (ActionUnit.AU01, ActionUnit.AU02, ActionUnit.AU05,
                            ActionUnit.AU26),
    EmotionLabel.SAD: (ActionUnit.AU04, ActionUnit.AU01, ActionUnit.AU14,
                       ActionUnit.AU15),
    EmotionLabel.FEAR: (ActionUnit.AU01, ActionUnit.AU02, ActionUnit.AU04,
                        ActionUnit.AU05, ActionUnit.AU07, ActionUnit.AU20,
                        ActionUnit.AU26),
    EmotionLabel.DOUBT: (ActionUnit.AU25,),
    EmotionLabel.CONTEMPT: (ActionUnit.AU12, ActionUnit.AU10, ActionUnit.AU15,
                            ActionUnit.AU17),
}


@dataclass(frozen=True)
class AUPhraseTable:
    """Ordered phrase variants for every AU code."""

    entries: Mapping[ActionUnit, tuple[str, ...]] = field(
        default_factory=lambda: dict(AU_PHRASES))

    def __post_init__(self):
        for au in ActionUnit:
            phrases = self.entries.get(au)
            if not phrases:
                raise ValueError(f"phrase table missing entries for {au.value}")
            if any(not p for p in phrases):
                raise ValueError(f"empty phrase for {au.value}")

    def phrase(self, au: ActionUnit, variant_index: int) -> str:
        variants = self.entries[au]
        return variants[variant_index % len(variants)]


@dataclass(frozen=True)
class EmotionRuleSet:
    """Emotion -> AU combination rules plus the matching policy.

    A rule matches a frame when at least ``match_fraction`` of its AUs
    reach ``activation_threshold`` intensity.
    """

    rules: Mapping[EmotionLabel, tuple[ActionUnit, ...]] = field(
        default_factory=lambda: dict(EMOTION_RULES))
    match_fraction: float = 0.6
    activation_threshold: float = 1.0

    def __post_init__(self):
        if EmotionLabel.NEUTRAL in self.rules:
            raise ValueError("neutral must not carry an AU rule")
        expected = set(EmotionLabel) - {EmotionLabel.NEUTRAL}
        if set(self.rules) != expected:
            missing = sorted(l.value for l in expected - set(self.rules))
            raise ValueError(f"rule set must cover all eight ruled emotions; missing {missing}")
        if any(not aus for aus in self.rules.values()):
            raise ValueError("every rule needs at least one AU")
        if not 0.0 < self.match_fraction <= 1.0:
            raise ValueError(f"match_fraction {self.match_fraction} outside (0, 1]")
        if not 0.0 <= self.activation_threshold <= 5.0:
            raise ValueError(f"activation_threshold {self.activation_threshold} outside [0, 5]")

    def rule(self, label: EmotionLabel) -> Optional[tuple[ActionUnit, ...]]:
        return self.rules.get(label)


def au_descriptions(au: ActionUnit, variant_index: int,
                    table: AUPhraseTable | None = None) -> str:
    """Phrase variant for an AU; the index wraps modulo the variant count."""
    return (table or _DEFAULT_PHRASES).phrase(au, variant_index)


def emotion_rule(label: EmotionLabel,
                 rules: EmotionRuleSet | None = None) -> Optional[tuple[ActionUnit, ...]]:
    """AU list for a ruled emotion, or None for neutral."""
    return (rules or _DEFAULT_RULES).rule(label)


def active_aus(frame: "FrameAUVector", threshold: float) -> set[ActionUnit]:
    """AUs whose intensity reaches the threshold (inclusive boundary)."""
    if not 0.0 <= threshold <= 5.0:
        raise ValueError(f"threshold {threshold} outside [0, 5]")
    return {au for au, value in frame.intensities.items() if value >= threshold}


def load_table_config(path: str | Path) -> tuple[AUPhraseTable, EmotionRuleSet]:
    """Load phrase/rule overrides from a JSON file.

    Partial overrides are merged over the built-in tables.
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    phrases = dict(AU_PHRASES)
    for code, variants in raw.get("phrases", {}).items():
        phrases[ActionUnit.parse(code)] = tuple(str(v) for v in variants)
    rules = dict(EMOTION_RULES)
    for name, codes in raw.get("rules", {}).items():
        rules[EmotionLabel.parse(name)] = tuple(ActionUnit.parse(c) for c in codes)
    rule_set = EmotionRuleSet(
        rules=rules,
        match_fraction=float(raw.get("match_fraction", 0.6)),
        activation_threshold=float(raw.get("activation_threshold", 1.0)),
    )
    return AUPhraseTable(entries=phrases), rule_set


_DEFAULT_PHRASES = AUPhraseTable()
_DEFAULT_RULES = EmotionRuleSet()


def default_phrase_table() -> AUPhraseTable:
    return _DEFAULT_PHRASES


def default_rule_set() -> EmotionRuleSet:
    return _DEFAULT_RULES
