import random

import pytest

from emoannot.au import ActionUnit
from emoannot.ingest import ClipTrace, FrameAUVector

ALL_AUS = list(ActionUnit)


def make_frame(intensities=None, frame_index=1, timestamp=0.0,
               confidence=0.98, success=True):
    return FrameAUVector(
        frame_index=frame_index,
        timestamp=timestamp,
        confidence=confidence,
        success=success,
        intensities=dict(intensities or {}),
    )


def make_trace(frames, clip_id="clip"):
    return ClipTrace(clip_id=clip_id, frames=list(frames))


def random_trace(rng: random.Random, max_frames=50, clip_id="clip"):
    """Random clip over a random AU subset; intensities are multiples of
    0.25 so sums stay exact in floating point."""
    n_frames = rng.randint(1, max_frames)
    n_aus = rng.randint(1, len(ALL_AUS))
    aus = rng.sample(ALL_AUS, n_aus)
    frames = []
    ts = 0.0
    for i in range(n_frames):
        frames.append(make_frame(
            intensities={au: rng.randint(0, 20) * 0.25 for au in aus},
            frame_index=i + 1,
            timestamp=ts,
        ))
        ts += 0.04
    return make_trace(frames, clip_id=clip_id)


def openface_csv(frames, aus=None, pad_header=False):
    """Render frames in the CSV layout the parser accepts."""
    if aus is None:
        aus = sorted({au for f in frames for au in f.intensities})
    sep = ", " if pad_header else ","
    lines = [sep.join(["frame", "timestamp", "confidence", "success"]
                      + [f"{au.value}_r" for au in aus])]
    for f in frames:
        lines.append(",".join(
            [str(f.frame_index), repr(f.timestamp), repr(f.confidence),
             str(int(f.success))] + [repr(f.intensities.get(au, 0.0)) for au in aus]))
    return "\n".join(lines) + "\n"


@pytest.fixture
def rng():
    return random.Random(20240901)
