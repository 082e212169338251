import math
import sys

import pytest

from engage.core import EMOTIONS, EngineConfig, FaceObservation, normalize_emotions


def emotions_for(label=None, p=0.9, **explicit):
    """Distribution with ``p`` on ``label`` and the rest spread evenly."""
    if explicit:
        raw = {e: 0.0 for e in EMOTIONS}
        raw.update(explicit)
        return normalize_emotions(raw)
    rest = (1.0 - p) / (len(EMOTIONS) - 1)
    return normalize_emotions({e: (p if e == label else rest) for e in EMOTIONS})


def make_obs(t=0.0, track_id=1, bbox=(0.5, 0.5, 0.1, 0.1), yaw=0.0, pitch=0.0, roll=0.0,
             label="neutral", p=0.9, valence=0.0, arousal=0.0, emotions=None):
    return FaceObservation(
        timestamp=t,
        track_id=track_id,
        bbox=tuple(bbox),
        yaw=yaw,
        pitch=pitch,
        roll=roll,
        emotions=emotions if emotions is not None else emotions_for(label, p),
        valence=valence,
        arousal=arousal,
    )


def event_dict(**over):
    d = {
        "t": 0.0,
        "track_id": 1,
        "bbox": [0.5, 0.5, 0.1, 0.1],
        "yaw": 0.0,
        "pitch": 0.0,
        "roll": 0.0,
        "emotions": {e: (1.0 if e == "happy" else 0.0) for e in EMOTIONS},
        "valence": 0.7,
        "arousal": 0.3,
    }
    d.update(over)
    return d


@pytest.fixture
def cfg():
    return EngineConfig()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.line(n))
