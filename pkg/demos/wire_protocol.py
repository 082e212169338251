"""
Talking to the engine over lines of JSON
========================================

Events go in one per line; each event produces a block of command lines.
Malformed lines are counted and skipped without stopping the stream.
"""

import io
import json

from engage import EngineConfig
from engage.cli import run_stream

emotions = {"neutral": 0.05, "happy": 0.9, "disgust": 0.01, "fear": 0.01,
            "surprise": 0.01, "anger": 0.01, "sadness": 0.01}
lines = [
    json.dumps({"t": k / 30, "track_id": 7, "bbox": [0.55, 0.45, 0.1, 0.12], "yaw": -3.0, "pitch": 3.0,
                "roll": 0.0, "emotions": emotions, "valence": 0.6, "arousal": 0.3})
    for k in range(12)
]
lines.insert(4, '{"t": 0.1, "track_id": ')

out, err = io.StringIO(), io.StringIO()
summary = run_stream(lines, out, EngineConfig(), err)
print(out.getvalue().strip().splitlines()[-3:])
print("errors:", err.getvalue().strip())
print({k: v for k, v in summary.to_dict().items() if k != "latency"})
