"""Training-time instruction sampling and prompt assembly.

Each task carries five fixed instruction strings; sampling is uniform and
fully determined by the seed. The feature placeholders stay literal text:
feature injection happens downstream, outside this toolkit.
"""
from __future__ import annotations

import json
import random
from enum import Enum
from pathlib import Path
from typing import Mapping

from .errors import EmptyInstructionError


class TaskKind(str, Enum):
    EMOTION = "emotion"
    REASON = "reason"


EMOTION_INSTRUCTIONS: tuple[str, ...] = (
    "Please determine which emotion label in the video represents: happy, "
    "sad, neutral, angry, worried, surprise, fear, contempt, doubt.",
    "Identify the displayed emotion in the video: is it happy, sad, neutral, "
    "angry, worried, or surprise, fear, contempt, doubt?",
    "Determine the emotional state shown in the video, choosing from happy, "
    "sad, neutral, angry, worried, surprise, fear, contempt or doubt.",
    "Please ascertain the specific emotion portrayed in the video, whether "
    "it be happy, sad, neutral, angry, worried, surprise, fear, contempt "
    "or  doubt.",
    "Assess and label the emotion evident in the video: could it be happy, "
    "sad, neutral, angry, worried, surprise, fear, contempt, doubt?",
)

REASON_INSTRUCTIONS: tuple[str, ...] = (
    "Please analyze all the clues in the video and reason out the emotional "
    "label of the person in the video.",
    "What is the emotional state of the person in the video? Please tell me "
    "the reason.",
    "What are the facial expressions and vocal tone used in the video? What "
    "is the intended meaning behind his words? Which emotion does this "
    "reflect?",
    "Please integrate information from various modalities to infer the "
    "emotional category of the person in the video.",
    "Could you describe the emotion-related features of the individual in "
    "the video? What emotional category do they fall into?",
)

_POOLS: dict[TaskKind, tuple[str, ...]] = {
    TaskKind.EMOTION: EMOTION_INSTRUCTIONS,
    TaskKind.REASON: REASON_INSTRUCTIONS,
}


def instruction_pool(task: TaskKind,
                     pools: Mapping[TaskKind, tuple[str, ...]] | None = None
                     ) -> tuple[str, ...]:
    return (pools or _POOLS)[task]


def sample_instruction(task: TaskKind, rng_seed: int,
                       pools: Mapping[TaskKind, tuple[str, ...]] | None = None
                       ) -> str:
    """Uniformly pick one instruction for the task, fixed by the seed.

    String-keyed seeding hashes through SHA-512, so the draw is stable
    across runs and platforms.
    """
    pool = instruction_pool(task, pools)
    rng = random.Random(f"{task.value}:{rng_seed}")
    return pool[rng.randrange(len(pool))]


def sample_task(rng_seed: int, reason_probability: float = 0.5) -> TaskKind:
    """Pick the task for one training sample (recognition vs reasoning)."""
    rng = random.Random(f"task:{rng_seed}")
    return TaskKind.REASON if rng.random() < reason_probability else TaskKind.EMOTION


def build_training_prompt(task: TaskKind, instruction: str) -> str:
    """Wrap an instruction in the multimodal training prompt template."""
    if not instruction:
        raise EmptyInstructionError("instruction must be nonempty")
    return (f"[INST] <VideoFeature> <AudioFeature> [{task.value}] "
            f"{instruction} [/INST]")


def load_instruction_config(path: str | Path) -> dict[TaskKind, tuple[str, ...]]:
    """Load instruction list overrides: {"emotion": [...], "reason": [...]}."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    pools = dict(_POOLS)
    for key, values in raw.items():
        task = TaskKind(key)
        items = tuple(str(v) for v in values)
        if not items or any(not v for v in items):
            raise ValueError(f"instruction list for {key!r} must be nonempty strings")
        pools[task] = items
    return pools
