"""Newline-delimited JSON records: perception events in, robot commands out.

Event line::

    {"t": 0.033, "track_id": 1, "bbox": [0.5, 0.5, 0.1, 0.1],
     "yaw": 0.0, "pitch": 0.0, "roll": 0.0,
     "emotions": {"neutral": 0.1, "happy": 0.9, ...},
     "valence": 0.6, "arousal": 0.2}

Command line::

    {"t":1.5,"cmd":"speak","target":3,"params":{"text":"hello"}}

Unknown top-level keys in events are ignored.
"""

from __future__ import annotations

import orjson
from typing import Iterable, Iterator, TextIO

from .arbiter import COMMAND_TYPES, RobotCommand
from .core import EMOTIONS, FaceObservation, ValidationError, normalize_emotions

PARAM_KEYS = {
    "head_follow": ("pan", "tilt"),
    "avert_gaze": ("pan", "tilt"),
    "body_rotate": ("delta",),
    "torso_lift": ("height",),
    "speak": ("text",),
    "idle": (),
}
EVENT_KEYS = ("t", "track_id", "bbox", "yaw", "pitch", "roll", "emotions", "valence", "arousal")


class ProtocolError(ValueError):
    """A record could not be decoded. Carries the line number and field."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


def _number(obj, key, lineno):
    v = obj[key]
    if type(v) is float:
        return v
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ProtocolError(f"field {key} is not a number", line=lineno, field=key)
    return float(v)


def decode_event(obj, lineno: int | None = None) -> FaceObservation:
    if not isinstance(obj, dict):
        raise ProtocolError("record is not an object", line=lineno)
    for key in EVENT_KEYS:
        if key not in obj:
            raise ProtocolError(f"missing field {key}", line=lineno, field=key)
    tid = obj["track_id"]
    if isinstance(tid, bool) or not isinstance(tid, int) or tid < 0:
        raise ProtocolError("field track_id is not an unsigned integer", line=lineno, field="track_id")
    bbox = obj["bbox"]
    if (
        not isinstance(bbox, list)
        or len(bbox) != 4
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in bbox)
    ):
        raise ProtocolError("field bbox must be [cx, cy, w, h]", line=lineno, field="bbox")
    emotions = obj["emotions"]
    if not isinstance(emotions, dict):
        raise ProtocolError("field emotions is not an object", line=lineno, field="emotions")
    try:
        return FaceObservation(
            timestamp=_number(obj, "t", lineno),
            track_id=tid,
            bbox=tuple(float(v) for v in bbox),
            yaw=_number(obj, "yaw", lineno),
            pitch=_number(obj, "pitch", lineno),
            roll=_number(obj, "roll", lineno),
            emotions=normalize_emotions(emotions),
            valence=_number(obj, "valence", lineno),
            arousal=_number(obj, "arousal", lineno),
        )
    except ValidationError as exc:
        raise ProtocolError(str(exc), line=lineno, field=exc.field) from None


def parse_event(line: str, lineno: int | None = None) -> FaceObservation:
    """Decode one event line. Emotions are renormalized to sum to one."""
    try:
        obj = orjson.loads(line)
    except orjson.JSONDecodeError as exc:
        raise ProtocolError(f"malformed record: {exc}", line=lineno) from None
    return decode_event(obj, lineno)


def event_to_dict(obs: FaceObservation) -> dict:
    return {
        "t": obs.timestamp,
        "track_id": obs.track_id,
        "bbox": list(obs.bbox),
        "yaw": obs.yaw,
        "pitch": obs.pitch,
        "roll": obs.roll,
        "emotions": dict(zip(EMOTIONS, obs.emotions.probs)),
        "valence": obs.valence,
        "arousal": obs.arousal,
    }


def emit_event(obs: FaceObservation) -> str:
    return orjson.dumps(event_to_dict(obs), option=orjson.OPT_SERIALIZE_NUMPY).decode()


def command_to_dict(cmd: RobotCommand) -> dict:
    return {"t": float(cmd.t), "cmd": cmd.kind, "target": cmd.target, "params": cmd.params()}


def emit_command(cmd: RobotCommand) -> str:
    """Serialize one command as a single line with stable key order."""
    return orjson.dumps(command_to_dict(cmd), option=orjson.OPT_SERIALIZE_NUMPY).decode()


def parse_command(line: str, lineno: int | None = None) -> RobotCommand:
    try:
        obj = orjson.loads(line)
    except orjson.JSONDecodeError as exc:
        raise ProtocolError(f"malformed record: {exc}", line=lineno) from None
    if not isinstance(obj, dict):
        raise ProtocolError("record is not an object", line=lineno)
    for key in ("t", "cmd", "target", "params"):
        if key not in obj:
            raise ProtocolError(f"missing field {key}", line=lineno, field=key)
    cls = COMMAND_TYPES.get(obj["cmd"])
    if cls is None:
        raise ProtocolError(f"unknown command {obj['cmd']!r}", line=lineno, field="cmd")
    params = obj["params"]
    expected = PARAM_KEYS[cls.kind]
    if not isinstance(params, dict) or set(params) != set(expected):
        raise ProtocolError(f"params for {cls.kind} must be {sorted(expected)}", line=lineno, field="params")
    try:
        return cls(**params, t=float(obj["t"]), target=obj["target"])
    except (TypeError, ValueError) as exc:
        raise ProtocolError(str(exc), line=lineno, field="params") from None


def read_events(lines: Iterable[str], errors: list | None = None) -> Iterator[FaceObservation]:
    """Yield decoded events, skipping blank lines.

    Bad lines never stop the stream: their :class:`ProtocolError` is appended
    to ``errors`` (when given) and decoding continues with the next line.
    """
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            yield parse_event(line, lineno)
        except ProtocolError as exc:
            if errors is not None:
                errors.append(exc)


def write_commands(out: TextIO, cmds: Iterable[RobotCommand]) -> int:
    """Write commands as one block so lines are never interleaved."""
    text = "".join(emit_command(c) + "\n" for c in cmds)
    out.write(text)
    return text.count("\n")

