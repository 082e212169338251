"""Turn the selected strategy into head, body, torso and speech commands."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import ClassVar, Iterable, NamedTuple, Sequence

from .attention import Bearing, angle_between, direction
from .core import EngagementStrategy, EngineConfig, SentimentState, ValidationError

# extra clearance so a recomputed avert deviation never rounds below the cone
AVERT_MARGIN = 1e-6

_PRIORITY = {
    EngagementStrategy.AVOID: 0,
    EngagementStrategy.ENGAGE: 1,
    EngagementStrategy.ATTRACT: 2,
    EngagementStrategy.IGNORE: 3,
}


@dataclass(frozen=True)
class RobotCommand:
    kind: ClassVar[str] = ""
    t: float = field(default=0.0, kw_only=True)
    target: int | None = field(default=None, kw_only=True)

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class HeadFollow(RobotCommand):
    kind: ClassVar[str] = "head_follow"
    pan: float
    tilt: float

    def params(self):
        return {"pan": float(self.pan), "tilt": float(self.tilt)}


@dataclass(frozen=True)
class AvertGaze(RobotCommand):
    kind: ClassVar[str] = "avert_gaze"
    pan: float
    tilt: float

    def params(self):
        return {"pan": float(self.pan), "tilt": float(self.tilt)}


@dataclass(frozen=True)
class BodyRotate(RobotCommand):
    kind: ClassVar[str] = "body_rotate"
    delta: float

    def params(self):
        return {"delta": float(self.delta)}


@dataclass(frozen=True)
class TorsoLift(RobotCommand):
    kind: ClassVar[str] = "torso_lift"
    height: float

    def __post_init__(self):
        if not (0.0 <= self.height <= 1.0):
            raise ValidationError("height", "torso height must lie in [0, 1]")

    def params(self):
        return {"height": float(self.height)}


@dataclass(frozen=True)
class Speak(RobotCommand):
    kind: ClassVar[str] = "speak"
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValidationError("text", "utterance must be non-empty")

    def params(self):
        return {"text": self.text}


@dataclass(frozen=True)
class Idle(RobotCommand):
    kind: ClassVar[str] = "idle"


COMMAND_TYPES: dict[str, type[RobotCommand]] = {
    c.kind: c for c in (HeadFollow, BodyRotate, TorsoLift, Speak, AvertGaze, Idle)
}


@dataclass(frozen=True)
class RobotState:
    head_pan: float = 0.0
    head_tilt: float = 0.0
    base_heading: float = 0.0
    torso_height: float = 0.0
    greeted: frozenset = frozenset()


class Candidate(NamedTuple):
    track_id: int
    state: SentimentState | None
    strategy: EngagementStrategy
    bbox: Sequence[float]


def select_target(tracks: Iterable) -> int | None:
    """Pick the track to act on.

    Avoid outranks Engage, then Attract, then Ignore. Ties go to the larger
    face (closer person), then to the lower track id. Accepts
    :class:`Candidate` objects or plain ``(track_id, state, strategy, bbox)``
    tuples.
    """
    best_key, best_id = None, None
    for tid, _, strategy, bbox in tracks:
        key = (_PRIORITY[strategy], -(bbox[2] * bbox[3]), tid)
        if best_key is None or key < best_key:
            best_key, best_id = key, tid
    return best_id


def reset_episode(robot: RobotState, track_id) -> RobotState:
    """Forget that ``track_id`` was greeted so its next Engage greets again."""
    if track_id not in robot.greeted:
        return robot
    return replace(robot, greeted=robot.greeted - {track_id})


def optical_deviation(alpha: float, beta: float) -> float:
    """Angle between the optical axis and a bearing, degrees."""
    return angle_between((0.0, 0.0, 1.0), direction(alpha, beta))


def _clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def _step(current, goal, max_step):
    if max_step is None:
        return goal
    return current + _clamp(goal - current, -max_step, max_step)


def _aim(bearing, robot, cfg, dt, allow_body):
    """Head (and optionally base) motion that brings the target to the image center.

    Returns (base_delta, pan, tilt). With ``dt`` the motion is limited to what
    the configured rates allow within one tick.
    """
    limit = cfg.head_yaw_limit
    desired = robot.head_pan + bearing.alpha
    tilt_goal = _clamp(robot.head_tilt + bearing.beta, -90.0, 90.0)
    base_delta = 0.0
    if abs(desired) > limit and allow_body:
        base_delta = desired
        if dt is not None:
            base_delta = _clamp(base_delta, -cfg.base_rotate_rate * dt, cfg.base_rotate_rate * dt)
    pan_goal = _clamp(desired - base_delta, -limit, limit)
    head_step = None if dt is None else cfg.head_pan_rate * dt
    pan = _step(robot.head_pan, pan_goal, head_step)
    tilt = _step(robot.head_tilt, tilt_goal, head_step)
    return base_delta, pan, tilt


def _avert(bearing, robot, cfg):
    """Gaze pose that keeps the target off-center but inside the image."""
    a = cfg.avert_half_angle
    if optical_deviation(bearing.alpha, bearing.beta) >= a:
        return 0.0, robot.head_pan, robot.head_tilt
    limit = cfg.head_yaw_limit
    shift = a + AVERT_MARGIN
    # target ends up at alpha' = s * shift; pan change is alpha - alpha'
    sides = sorted((1.0, -1.0), key=lambda s: (abs(bearing.alpha - s * shift), -s))
    for s in sides:
        pan = robot.head_pan + bearing.alpha - s * shift
        if abs(pan) <= limit:
            return 0.0, pan, robot.head_tilt
    s = sides[0]
    pan_new = robot.head_pan + bearing.alpha - s * shift
    pan = _clamp(pan_new, -limit, limit)
    return pan_new - pan, pan, robot.head_tilt


def plan_commands(
    strategy: EngagementStrategy,
    bearing: Bearing,
    robot: RobotState,
    cfg: EngineConfig,
    *,
    target: int | None = None,
    t: float = 0.0,
    dt: float | None = None,
) -> tuple[RobotState, list[RobotCommand]]:
    """Commands for one decision tick toward one target.

    Without ``dt`` commands are kinematic goals. With ``dt`` head and base
    motion is rate-limited to what fits in one tick; AvertGaze still carries
    its goal pose and the returned state moves toward it at the head rate.
    """
    stamp = {"t": t, "target": target}
    cmds: list[RobotCommand] = []
    head_pan, head_tilt = robot.head_pan, robot.head_tilt
    base, torso, greeted = robot.base_heading, robot.torso_height, robot.greeted

    if strategy in (EngagementStrategy.ENGAGE, EngagementStrategy.ATTRACT):
        if torso < 1.0:
            cmds.append(TorsoLift(1.0, **stamp))
            torso = 1.0
        delta, head_pan, head_tilt = _aim(bearing, robot, cfg, dt, allow_body=True)
        if delta:
            cmds.append(BodyRotate(delta, **stamp))
            base += delta
        cmds.append(HeadFollow(head_pan, head_tilt, **stamp))
        if strategy is EngagementStrategy.ENGAGE and target not in greeted:
            cmds.append(Speak(cfg.greeting, **stamp))
            greeted = greeted | {target}
    elif strategy is EngagementStrategy.IGNORE:
        _, head_pan, head_tilt = _aim(bearing, robot, cfg, dt, allow_body=False)
        cmds.append(HeadFollow(head_pan, head_tilt, **stamp))
    elif strategy is EngagementStrategy.AVOID:
        delta, pan_goal, tilt_goal = _avert(bearing, robot, cfg)
        if delta:
            if dt is not None:
                lim = cfg.base_rotate_rate * dt
                delta = _clamp(delta, -lim, lim)
            cmds.append(BodyRotate(delta, **stamp))
            base += delta
        cmds.append(AvertGaze(pan_goal, tilt_goal, **stamp))
        head_step = None if dt is None else cfg.head_pan_rate * dt
        head_pan = _step(robot.head_pan, pan_goal, head_step)
        head_tilt = _step(robot.head_tilt, tilt_goal, head_step)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    new = RobotState(head_pan, head_tilt, base, torso, greeted)
    return new, cmds
