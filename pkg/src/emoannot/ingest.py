"""Parsing of per-frame AU intensity logs (OpenFace CSV layout).

A valid source is UTF-8 CSV with a header containing at least ``frame``,
``timestamp``, ``confidence``, ``success`` and one or more ``AUxx_r``
intensity columns. ``AUxx_c`` presence columns and any other columns are
ignored. Header cells may carry leading spaces (the reference tool pads
them); they are stripped before matching.
"""
from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

from .au import ActionUnit
from .errors import (
    EmptyAfterFilterError,
    MalformedHeaderError,
    NonNumericFieldError,
    RowArityError,
    TraceOrderError,
)

_AU_INTENSITY = re.compile(r"^AU(\d{2})_r$")
_AU_PRESENCE = re.compile(r"^AU(\d{2})_c$")

INTENSITY_MIN = 0.0
INTENSITY_MAX = 5.0


@dataclass
class FrameAUVector:
    """One frame's AU intensities plus detector bookkeeping."""

    frame_index: int
    timestamp: float
    confidence: float
    success: bool
    intensities: dict[ActionUnit, float]


@dataclass
class ClipTrace:
    """Ordered frame sequence for one clip.

    ``warnings`` records per-row anomalies (e.g. clamped intensities) and
    is deliberately excluded from equality.
    """

    clip_id: str
    frames: list[FrameAUVector]
    warnings: list[str] = field(default_factory=list, compare=False)

    @property
    def duration(self) -> float:
        """Last minus first timestamp; 0 for a single-frame clip."""
        if not self.frames:
            return 0.0
        return self.frames[-1].timestamp - self.frames[0].timestamp


def _as_text_lines(source) -> Iterable[str]:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data)


def _parse_float(value: str, row: int, column: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise NonNumericFieldError(row, column, value) from None


def parse_openface_csv(source: bytes | str | IO, clip_id: str) -> ClipTrace:
    """Parse an AU intensity CSV into a validated ClipTrace.

    ``source`` may be raw bytes, CSV text, or a file object. Data rows are
    numbered from 1 in error messages. Intensities outside [0, 5] are
    clamped, with a warning recorded per row.
    """
    reader = csv.reader(_as_text_lines(source))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedHeaderError("empty input: no header row") from None

    columns = [cell.strip() for cell in header]
    index_of: dict[str, int] = {}
    au_columns: dict[ActionUnit, int] = {}
    for i, name in enumerate(columns):
        m = _AU_INTENSITY.match(name)
        if m:
            code = f"AU{m.group(1)}"
            try:
                au = ActionUnit.parse(code)
            except ValueError:
                raise MalformedHeaderError(f"unknown AU code {code!r} in header") from None
            au_columns[au] = i
            continue
        if _AU_PRESENCE.match(name):
            continue
        index_of[name] = i

    for required in ("frame", "timestamp", "confidence", "success"):
        if required not in index_of:
            raise MalformedHeaderError(f"missing required column {required!r}")
    if not au_columns:
        raise MalformedHeaderError("no AUxx_r intensity columns in header")

    frames: list[FrameAUVector] = []
    warnings: list[str] = []
    prev_index: int | None = None
    prev_ts: float | None = None
    for row_no, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) != len(columns):
            raise RowArityError(row_no, len(columns), len(row))

        raw_frame = row[index_of["frame"]].strip()
        try:
            frame_index = int(float(raw_frame))
        except ValueError:
            raise NonNumericFieldError(row_no, "frame", raw_frame) from None
        timestamp = _parse_float(row[index_of["timestamp"]].strip(), row_no, "timestamp")
        confidence = _parse_float(row[index_of["confidence"]].strip(), row_no, "confidence")
        success = _parse_float(row[index_of["success"]].strip(), row_no, "success") != 0.0

        intensities: dict[ActionUnit, float] = {}
        for au, col in au_columns.items():
            value = _parse_float(row[col].strip(), row_no, f"{au.value}_r")
            if value < INTENSITY_MIN or value > INTENSITY_MAX:
                clamped = min(max(value, INTENSITY_MIN), INTENSITY_MAX)
                warnings.append(
                    f"row {row_no}: {au.value}_r intensity {value} clamped to {clamped}")
                value = clamped
            intensities[au] = value

        if prev_index is not None and frame_index <= prev_index:
            raise TraceOrderError(row_no, f"frame index {frame_index} not increasing")
        if prev_ts is not None and timestamp < prev_ts:
            raise TraceOrderError(row_no, f"timestamp {timestamp} decreasing")
        prev_index, prev_ts = frame_index, timestamp

        frames.append(FrameAUVector(
            frame_index=frame_index,
            timestamp=timestamp,
            confidence=confidence,
            success=success,
            intensities=intensities,
        ))

    return ClipTrace(clip_id=clip_id, frames=frames, warnings=warnings)


def write_openface_csv(trace: ClipTrace, sink: IO[str] | None = None) -> str:
    """Serialize a trace back to the CSV layout accepted by the parser.

    Floats use shortest round-tripping representation, so
    parse(write(parse(x))) == parse(x).
    """
    aus = sorted(trace.frames[0].intensities) if trace.frames else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["frame", "timestamp", "confidence", "success"]
                    + [f"{au.value}_r" for au in aus])
    for f in trace.frames:
        writer.writerow([f.frame_index, repr(f.timestamp), repr(f.confidence),
                         int(f.success)] + [repr(f.intensities[au]) for au in aus])
    text = buf.getvalue()
    if sink is not None:
        sink.write(text)
    return text


def read_clip(path: str | Path, clip_id: str | None = None) -> ClipTrace:
    """Parse a CSV file; the clip id defaults to the file stem."""
    p = Path(path)
    with p.open("rb") as fh:
        return parse_openface_csv(fh, clip_id or p.stem)


def filter_valid(trace: ClipTrace, min_confidence: float) -> ClipTrace:
    """Keep successful frames at or above the confidence cutoff."""
    kept = [f for f in trace.frames
            if f.success and f.confidence >= min_confidence]
    if not kept:
        raise EmptyAfterFilterError(
            f"clip {trace.clip_id!r}: no frame with success=1 and "
            f"confidence >= {min_confidence}")
    return ClipTrace(clip_id=trace.clip_id, frames=kept, warnings=list(trace.warnings))
