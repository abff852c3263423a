"""Recognition metrics: confusion matrices, UAR/WAR, weighted F, and
open-vocabulary set-overlap scores.

Classes with zero ground-truth support are excluded from UAR, WAR, and
WAF by default (an absent class should not depress the averages); pass
``include_zero_support=True`` to count them as recall 0 instead.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Iterable, Sequence

from .errors import NoSamplesError

Label = Hashable


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are ground truth, columns are predictions."""

    labels: tuple[Label, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.labels)
        if len(self.counts) != n or any(len(row) != n for row in self.counts):
            raise ValueError("counts must be square with one row per label")
        if any(c < 0 for row in self.counts for c in row):
            raise ValueError("counts must be nonnegative")

    def support(self, i: int) -> int:
        return sum(self.counts[i])

    def predicted(self, j: int) -> int:
        return sum(row[j] for row in self.counts)

    def recall(self, i: int) -> float:
        n = self.support(i)
        return self.counts[i][i] / n if n else 0.0

    def precision(self, j: int) -> float:
        n = self.predicted(j)
        return self.counts[j][j] / n if n else 0.0

    @property
    def total(self) -> int:
        return sum(self.support(i) for i in range(len(self.labels)))


def confusion_matrix(pairs: Iterable[tuple[Label, Label]],
                     labels: Sequence[Label] | None = None) -> ConfusionMatrix:
    """Count (truth, prediction) pairs into a square matrix.

    Without an explicit label order, labels sort by their string form.
    """
    pairs = list(pairs)
    if labels is None:
        seen = {t for t, _ in pairs} | {p for _, p in pairs}
        labels = sorted(seen, key=str)
    labels = tuple(labels)
    index = {label: i for i, label in enumerate(labels)}
    grid = [[0] * len(labels) for _ in labels]
    for truth, pred in pairs:
        grid[index[truth]][index[pred]] += 1
    return ConfusionMatrix(labels=labels, counts=tuple(tuple(row) for row in grid))


def uar_war(m: ConfusionMatrix,
            include_zero_support: bool = False) -> tuple[float, float]:
    """(unweighted, support-weighted) average per-class recall."""
    indices = [i for i in range(len(m.labels))
               if include_zero_support or m.support(i) > 0]
    total = sum(m.support(i) for i in indices)
    if total == 0:
        raise NoSamplesError("confusion matrix has no ground-truth samples")
    recalls = [m.recall(i) for i in indices]
    uar = sum(recalls) / len(recalls)
    war = sum((m.support(i) / total) * m.recall(i) for i in indices)
    return uar, war


def f_score(precision: float, recall: float) -> float:
    """Harmonic mean; defined as 0 when precision + recall is 0."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def per_class_f(m: ConfusionMatrix) -> dict[Label, float]:
    return {label: f_score(m.precision(i), m.recall(i))
            for i, label in enumerate(m.labels)}


def waf(pairs: Iterable[tuple[Label, Label]],
        labels: Sequence[Label] | None = None,
        include_zero_support: bool = False) -> float:
    """Support-weighted average of per-class F-scores."""
    m = confusion_matrix(pairs, labels)
    return waf_from_matrix(m, include_zero_support=include_zero_support)


def waf_from_matrix(m: ConfusionMatrix,
                    include_zero_support: bool = False) -> float:
    indices = [i for i in range(len(m.labels))
               if include_zero_support or m.support(i) > 0]
    total = sum(m.support(i) for i in indices)
    if total == 0:
        raise NoSamplesError("confusion matrix has no ground-truth samples")
    return sum((m.support(i) / total) * f_score(m.precision(i), m.recall(i))
               for i in indices)


@dataclass(frozen=True)
class OVPrediction:
    """Free-form predicted and ground-truth label sets for one sample."""

    predicted: frozenset[str]
    ground_truth: frozenset[str]

    @staticmethod
    def of(predicted: Iterable[str], ground_truth: Iterable[str]) -> "OVPrediction":
        return OVPrediction(frozenset(predicted), frozenset(ground_truth))


def _normalize(labels: frozenset[str]) -> frozenset[str]:
    cleaned = {label.strip().lower() for label in labels}
    cleaned.discard("")
    return frozenset(cleaned)


@dataclass(frozen=True)
class OVScores:
    accuracy_s: float
    recall_s: float
    avg: float


def ov_scores(samples: Iterable[OVPrediction]) -> OVScores:
    """Mean per-sample set overlap: accuracy against the prediction set,
    recall against the ground-truth set, and their average.

    Labels are lowercased and trimmed before comparison. A sample with an
    empty prediction (or empty ground truth) contributes 0 to the
    corresponding score.
    """
    samples = list(samples)
    if not samples:
        return OVScores(0.0, 0.0, 0.0)
    acc_sum = rec_sum = 0.0
    for sample in samples:
        predicted = _normalize(sample.predicted)
        truth = _normalize(sample.ground_truth)
        hit = len(predicted & truth)
        acc_sum += hit / len(predicted) if predicted else 0.0
        rec_sum += hit / len(truth) if truth else 0.0
    accuracy_s = acc_sum / len(samples)
    recall_s = rec_sum / len(samples)
    return OVScores(accuracy_s, recall_s, (accuracy_s + recall_s) / 2)


def read_closed_set_csv(path: str | Path) -> list[tuple[str, str, str]]:
    """Rows of (sample_id, truth, pred) from a closed-set prediction file."""
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append((row["sample_id"].strip(), row["truth"].strip(),
                         row["pred"].strip()))
    return rows


def read_open_vocab_csv(path: str | Path) -> list[tuple[str, OVPrediction]]:
    """Rows of (sample_id, OVPrediction) with ';'-separated label sets."""
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            truth = [t for t in row["truth_labels"].split(";") if t.strip()]
            pred = [p for p in row["pred_labels"].split(";") if p.strip()]
            rows.append((row["sample_id"].strip(), OVPrediction.of(pred, truth)))
    return rows
