"""Coarse multimodal description assembly and the refinement prompt.

The coarse annotation is a mechanical concatenation of the four clue
texts. Slot substitution performs no whitespace normalization: whatever
spacing the clue texts carry is preserved byte-for-byte.
"""
from __future__ import annotations

from dataclasses import dataclass

from .au import ActionUnit, AUPhraseTable, EmotionLabel, default_phrase_table

DEFAULT_SUBJECT = "The person"

REFINE_SYSTEM_TEXT = ("You are an emotion analysis expert. Please infer emotion "
                      "label based on the given the emotional features.")

_QUESTION_SUFFIX = (" Please sort out the correct emotional clues and infer why "
                    "the person in the video feels {label}.")


@dataclass(frozen=True)
class ClueBundle:
    """The four unimodal clue texts for one sample."""

    subtitle: str
    audio_tone: str
    visual_expression: str
    visual_objective: str

    def missing(self) -> tuple[str, ...]:
        """Names of empty clue fields (empty strings are permitted but flagged)."""
        return tuple(name for name in ("subtitle", "audio_tone",
                                       "visual_expression", "visual_objective")
                     if not getattr(self, name))

    @property
    def complete(self) -> bool:
        return not self.missing()


def describe_expression(active: set[ActionUnit],
                        phrase_table: AUPhraseTable | None = None,
                        seed: int = 0) -> str:
    """One phrase per active AU, joined in AU-code order, '.'-terminated.

    The seed selects the variant index for every AU (wrapping per AU), so
    any seed is valid and output is deterministic. An empty set yields an
    empty string; callers flag that case.
    """
    if not active:
        return ""
    table = phrase_table or default_phrase_table()
    phrases = [table.phrase(au, seed) for au in sorted(active)]
    return ", ".join(phrases) + "."


def build_coarse_annotation(clues: ClueBundle, subject: str = DEFAULT_SUBJECT) -> str:
    """Instantiate the coarse description template.

    The audio-tone clue is already a full clause about the speaker's tone,
    so it joins with a bare ", and". The subject token is configurable for
    grammatical agreement with the source clues.
    """
    return (f"{subject} in the video is {clues.visual_objective}. "
            f"{subject}'s expression and actions include {clues.visual_expression}, "
            f"and {clues.audio_tone}. Saying: {clues.subtitle}")


def build_refinement_prompt(coarse: str, label: EmotionLabel) -> tuple[str, str]:
    """(system, question) pair asking the text backend to refine a coarse
    description into emotion reasoning for the given label."""
    question = coarse + _QUESTION_SUFFIX.format(label=label.value)
    return REFINE_SYSTEM_TEXT, question
