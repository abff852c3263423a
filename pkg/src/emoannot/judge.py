"""Overlap-judging harness: prompt builder and response parser.

The clue-overlap prompt compares two emotion reasoning texts and asks the
judging model for a 1-10 score plus a reason, in a fixed output format.
The label-overlap variant swaps the comparison target phrase; its wording
is a reconstruction (only the clue variant has a published reference).
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

from .backend import AuditLog, TextBackend
from .errors import (
    EmptyDescriptionError,
    NoScoreFoundError,
    ScoreOutOfRangeError,
)

SCORE_MIN = 1.0
SCORE_MAX = 10.0


class OverlapTarget(str, Enum):
    CLUE = "clue"
    LABEL = "label"


_TARGET_PHRASE = {
    OverlapTarget.CLUE: "emotional state description",
    OverlapTarget.LABEL: "emotional state label",
}

_PROMPT_TEMPLATE = '''Below, the "Actual Description" and "Predicted Description" of a character are given. Please follow the steps below to calculate the score for the "Predicted Description". The score should range from 1 to 10. In the end, only output the numerical value of the predicted score along with the reasoning.

1. Summarize the {target} of the character from the "Actual Description".
2. Summarize the {target} of the character from the "Predicted Description".
3. Calculate the overlap between the "Predicted Description" and the "Actual Description". The higher the overlap, the higher the score.
4. Output format: 'Predicted Score': Predicted Score; 'Reason': Reason

Input:
"Actual Description": {gt_reason}
"Predicted Description": {pred_reason}

Output:
'''


@dataclass(frozen=True)
class JudgeVerdict:
    score: float
    reason: str
    raw: str


def build_overlap_prompt(gt_reason: str, pred_reason: str,
                         target: OverlapTarget = OverlapTarget.CLUE) -> str:
    """Instantiate the judging prompt for one (reference, prediction) pair."""
    if not gt_reason or not pred_reason:
        raise EmptyDescriptionError("both descriptions must be nonempty")
    return _PROMPT_TEMPLATE.format(target=_TARGET_PHRASE[target],
                                   gt_reason=gt_reason, pred_reason=pred_reason)


_QUOTES = "'\"‘’“”`"
_SCORE_RE = re.compile(
    rf"[{_QUOTES}]*\s*Predicted\s+Score\s*[{_QUOTES}]*\s*[::]?\s*"
    rf"(-?\d+(?:\.\d+)?)",
    re.IGNORECASE)
_REASON_RE = re.compile(
    rf"[{_QUOTES}]*\s*Reason\s*[{_QUOTES}]*\s*[::]?\s*(.+)",
    re.IGNORECASE | re.DOTALL)


def parse_judge_response(raw: str) -> JudgeVerdict:
    """Extract the first score after a "Predicted Score" marker and the
    trailing reason text.

    Tolerates single, double, and typographic quotes around the markers
    and optional colon spacing.
    """
    match = _SCORE_RE.search(raw)
    if match is None:
        raise NoScoreFoundError(f"no 'Predicted Score' marker in {raw[:80]!r}")
    score = float(match.group(1))
    if not SCORE_MIN <= score <= SCORE_MAX:
        raise ScoreOutOfRangeError(
            f"score {score} outside [{SCORE_MIN:g}, {SCORE_MAX:g}]")

    tail = raw[match.end():]
    reason_match = _REASON_RE.search(tail)
    if reason_match:
        reason = reason_match.group(1).strip()
    else:
        reason = tail.strip().lstrip(";,. ").strip()
    if not reason:
        reason = raw.strip()
    return JudgeVerdict(score=score, reason=reason, raw=raw)


def score_overlap(backend: TextBackend, gt_reason: str, pred_reason: str,
                  target: OverlapTarget = OverlapTarget.CLUE,
                  system: str = "",
                  audit: Optional[AuditLog] = None,
                  max_tokens: int = 512) -> JudgeVerdict:
    """Build the prompt, query the judge backend, and parse its verdict."""
    prompt = build_overlap_prompt(gt_reason, pred_reason, target)
    answer = backend.generate(system, prompt, max_tokens=max_tokens)
    if audit is not None:
        audit.append({"system": system, "prompt": prompt, "response": answer})
    return parse_judge_response(answer)


def judge_batch(in_path: str | Path, out_path: str | Path,
                backend: TextBackend,
                target: OverlapTarget = OverlapTarget.CLUE,
                system: str = "",
                audit: Optional[AuditLog] = None) -> int:
    """Score a CSV of (sample_id, gt_reason, pred_reason) rows.

    Writes (sample_id, score, reason) rows and returns the count scored.
    """
    scored = 0
    with Path(in_path).open(newline="", encoding="utf-8") as fin, \
            Path(out_path).open("w", newline="", encoding="utf-8") as fout:
        reader = csv.DictReader(fin)
        writer = csv.writer(fout)
        writer.writerow(["sample_id", "score", "reason"])
        for row in reader:
            verdict = score_overlap(backend, row["gt_reason"],
                                    row["pred_reason"], target=target,
                                    system=system, audit=audit)
            writer.writerow([row["sample_id"], verdict.score, verdict.reason])
            scored += 1
    return scored
