"""Expert review and voting workflow for promoting refined records.

Reviewers score five criteria (0-5) and vote accept/reject. Once the
quorum is reached a sample is decided: accepted when accept votes form a
strict majority, rejected otherwise (ties reject - conservative
curation). State persists in an append-only JSONL event log and is
rebuilt by replay at startup.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .errors import (
    DecisionConflictError,
    MissingRefinementError,
    ScoreOutOfRangeError,
    UnknownSampleError,
)
from .store import AnnotationRecord, Granularity, write_records

# Review criteria, in ballot order: the three per-modality description
# accuracies, then the two reasoning checks.
CRITERIA = ("visual_accuracy", "audio_accuracy", "textual_accuracy",
            "reasoning_process", "reasoning_result")

VERDICT_ACCEPT = "accept"
VERDICT_REJECT = "reject"

DECISION_PENDING = "pending"
DECISION_ACCEPTED = "accepted"
DECISION_REJECTED = "rejected"


@dataclass(frozen=True)
class ReviewBallot:
    sample_id: str
    reviewer_id: str
    criteria_scores: tuple[float, ...]
    verdict: str
    submitted_at: str

    def validate(self) -> None:
        if len(self.criteria_scores) != len(CRITERIA):
            raise ScoreOutOfRangeError(
                f"expected {len(CRITERIA)} criteria scores, "
                f"got {len(self.criteria_scores)}")
        for name, score in zip(CRITERIA, self.criteria_scores):
            if not 0.0 <= score <= 5.0:
                raise ScoreOutOfRangeError(
                    f"criterion {name!r} score {score} outside [0, 5]")
        if self.verdict not in (VERDICT_ACCEPT, VERDICT_REJECT):
            raise ScoreOutOfRangeError(f"verdict must be accept or reject, "
                                       f"got {self.verdict!r}")

    def to_json_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "reviewer_id": self.reviewer_id,
            "criteria_scores": list(self.criteria_scores),
            "verdict": self.verdict,
            "submitted_at": self.submitted_at,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ReviewBallot":
        return cls(
            sample_id=str(data["sample_id"]),
            reviewer_id=str(data["reviewer_id"]),
            criteria_scores=tuple(float(s) for s in data["criteria_scores"]),
            verdict=str(data["verdict"]),
            submitted_at=str(data["submitted_at"]),
        )


@dataclass
class Tally:
    sample_id: str
    ballots: list[ReviewBallot] = field(default_factory=list)
    decision: str = DECISION_PENDING

    @property
    def mean_score(self) -> float:
        scores = [s for b in self.ballots for s in b.criteria_scores]
        return sum(scores) / len(scores) if scores else 0.0

    def to_json_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "ballots": [b.to_json_dict() for b in self.ballots],
            "decision": self.decision,
            "mean_score": self.mean_score,
        }


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class ReviewService:
    """In-memory review state with an append-only event log.

    Ballot writes are serialized through one lock; reads take the same
    lock briefly to snapshot consistent state.
    """

    def __init__(self, quorum: int = 4, reopen: bool = False,
                 log_path: str | Path | None = None):
        if quorum < 1:
            raise ValueError("quorum must be >= 1")
        self.quorum = quorum
        self.reopen = reopen
        self.log_path = Path(log_path) if log_path is not None else None
        self._lock = threading.Lock()
        self._records: dict[str, AnnotationRecord] = {}
        self._order: list[str] = []
        self._ballots: dict[str, dict[str, ReviewBallot]] = {}
        self._decisions: dict[str, str] = {}
        if self.log_path is not None and self.log_path.exists():
            self._replay()

    # --- event log ---

    def _append_event(self, event: dict) -> None:
        if self.log_path is None:
            return
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")

    def _replay(self) -> None:
        for line in self.log_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            event = json.loads(line)
            if event["event"] == "enqueue":
                record = AnnotationRecord.from_json_dict(event["record"])
                self._enqueue_unlogged(record)
            elif event["event"] == "ballot":
                ballot = ReviewBallot.from_json_dict(event["ballot"])
                self._apply_ballot(ballot)

    # --- queue ---

    def _enqueue_unlogged(self, record: AnnotationRecord) -> int:
        if record.sample_id in self._records:
            return self._order.index(record.sample_id)
        if not record.fine_description:
            raise MissingRefinementError(
                f"sample {record.sample_id!r} has no candidate refined "
                f"description")
        self._records[record.sample_id] = record
        self._order.append(record.sample_id)
        self._ballots.setdefault(record.sample_id, {})
        self._decisions.setdefault(record.sample_id, DECISION_PENDING)
        return len(self._order) - 1

    def enqueue(self, record: AnnotationRecord) -> int:
        """Queue a refined record for review; idempotent on sample_id."""
        with self._lock:
            known = record.sample_id in self._records
            position = self._enqueue_unlogged(record)
            if not known:
                self._append_event({"event": "enqueue",
                                    "record": record.to_json_dict()})
            return position

    def get_record(self, sample_id: str) -> AnnotationRecord:
        with self._lock:
            if sample_id not in self._records:
                raise UnknownSampleError(sample_id)
            return self._records[sample_id]

    def next_for_review(self, reviewer_id: str) -> Optional[AnnotationRecord]:
        """Next pending sample the reviewer has not voted on, if any."""
        with self._lock:
            for sample_id in self._order:
                if self._decisions[sample_id] != DECISION_PENDING:
                    continue
                if reviewer_id in self._ballots[sample_id]:
                    continue
                return self._records[sample_id]
        return None

    # --- voting ---

    def _apply_ballot(self, ballot: ReviewBallot) -> Tally:
        ballots = self._ballots[ballot.sample_id]
        ballots[ballot.reviewer_id] = ballot
        decision = self._decisions[ballot.sample_id]
        if len(ballots) >= self.quorum and (decision == DECISION_PENDING
                                            or self.reopen):
            accepts = sum(1 for b in ballots.values()
                          if b.verdict == VERDICT_ACCEPT)
            rejects = len(ballots) - accepts
            self._decisions[ballot.sample_id] = (
                DECISION_ACCEPTED if accepts > rejects else DECISION_REJECTED)
        return self._tally_unlocked(ballot.sample_id)

    def submit_vote(self, ballot: ReviewBallot) -> Tally:
        """Store one ballot (replacing the reviewer's prior one) and return
        the updated tally. Voting on a decided sample conflicts unless the
        service was configured with reopen=True."""
        ballot.validate()
        with self._lock:
            if ballot.sample_id not in self._records:
                raise UnknownSampleError(ballot.sample_id)
            if (self._decisions[ballot.sample_id] != DECISION_PENDING
                    and not self.reopen):
                raise DecisionConflictError(
                    f"sample {ballot.sample_id!r} already "
                    f"{self._decisions[ballot.sample_id]}")
            tally = self._apply_ballot(ballot)
            self._append_event({"event": "ballot",
                                "ballot": ballot.to_json_dict()})
            return tally

    def _tally_unlocked(self, sample_id: str) -> Tally:
        ballots = sorted(self._ballots[sample_id].values(),
                         key=lambda b: b.reviewer_id)
        return Tally(sample_id=sample_id, ballots=list(ballots),
                     decision=self._decisions[sample_id])

    def tally(self, sample_id: str) -> Tally:
        with self._lock:
            if sample_id not in self._records:
                raise UnknownSampleError(sample_id)
            return self._tally_unlocked(sample_id)

    # --- export ---

    def export_selected(self, sink) -> int:
        """Write accepted records, promoted to fine granularity, to the
        dataset sink. Rejected and pending records are not exported and
        keep their coarse granularity."""
        with self._lock:
            accepted = []
            for sample_id in self._order:
                if self._decisions[sample_id] != DECISION_ACCEPTED:
                    continue
                record = self._records[sample_id]
                accepted.append(AnnotationRecord(
                    sample_id=record.sample_id,
                    clues=record.clues,
                    pseudo_label=record.pseudo_label,
                    peak=record.peak,
                    duration=record.duration,
                    coarse_description=record.coarse_description,
                    fine_description=record.fine_description,
                    granularity=Granularity.FINE,
                    low_confidence=record.low_confidence,
                    peak_active_aus=record.peak_active_aus,
                    provenance=record.provenance,
                ))
        return write_records(accepted, sink)

    # --- views ---

    def view(self, sample_id: str) -> dict:
        """JSON payload for one sample as served over HTTP."""
        with self._lock:
            if sample_id not in self._records:
                raise UnknownSampleError(sample_id)
            record = self._records[sample_id]
            tally = self._tally_unlocked(sample_id)
        return {
            "sample_id": record.sample_id,
            "subtitle": record.clues.subtitle,
            "audio_tone": record.clues.audio_tone,
            "visual_expression": record.clues.visual_expression,
            "visual_objective": record.clues.visual_objective,
            "coarse_description": record.coarse_description,
            "candidate_fine_description": record.fine_description,
            "pseudo_label": record.pseudo_label.value,
            "tally": {
                "decision": tally.decision,
                "ballots": len(tally.ballots),
                "mean_score": tally.mean_score,
            },
        }


def make_ballot(sample_id: str, reviewer_id: str, criteria_scores,
                verdict: str, submitted_at: str | None = None) -> ReviewBallot:
    return ReviewBallot(sample_id=sample_id, reviewer_id=reviewer_id,
                        criteria_scores=tuple(float(s) for s in criteria_scores),
                        verdict=verdict,
                        submitted_at=submitted_at or _now_iso())
