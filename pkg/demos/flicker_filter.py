"""
Debouncing a noisy emotion stream
=================================

Per-frame classifiers flicker. The track filter only switches when a
state holds a window majority and has been voted for several frames in a
row, so single-frame glitches never reach the robot.
"""

from engage import EngineConfig, FaceObservation, normalize_emotions
from engage.attention import estimate_attention
from engage.sentiment import TrackState, update_track

cfg = EngineConfig()
print(f"window={cfg.window} dwell={cfg.dwell} votes needed={cfg.majority_count}")


def frame(k, label):
    emotions = normalize_emotions({e: (0.9 if e == label else 0.1 / 6) for e in
                                   ("neutral", "happy", "disgust", "fear", "surprise", "anger", "sadness")})
    return FaceObservation(k / 30, 1, (0.5, 0.5, 0.1, 0.1), 0.0, 0.0, 0.0, emotions, 0.0, 0.0)


# happy for a second, with two one-frame "anger" glitches, then a real change to sadness
labels = ["happy"] * 30 + ["anger"] + ["happy"] * 10 + ["anger"] + ["happy"] * 8 + ["sadness"] * 20
labels[5] = "fear"

track = TrackState.fresh(1, cfg)
last = None
for k, label in enumerate(labels):
    obs = frame(k, label)
    _, state = update_track(track, obs, estimate_attention(obs, cfg), cfg)
    if state != last:
        print(f"frame {k:3d} ({label:8s}) -> {state.key() if state else None}")
        last = state
