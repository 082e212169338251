"""Deterministic scripted scenarios run through the full decision pipeline.

A scenario scripts, per person, where they are (world bearing), how far
their head is turned away from the robot's camera, and which emotion they
show. Each frame is rendered into a :class:`FaceObservation` as seen from
the robot's *current* camera pose, so head following and gaze aversion feed
back into later observations.

Emotion distributions are Dirichlet draws around a smoothed one-hot mean
(0.9 on the scripted label, the remaining 0.1 spread evenly). The Dirichlet
parameter is ``concentration * mean``; larger concentration gives sharper
distributions, and ``concentration: null`` uses the mean itself.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np
import yaml

from .arbiter import AvertGaze, RobotState, Speak, optical_deviation
from .attention import Bearing, attention_score, bbox_center_from_bearing, direction
from .core import EMOTIONS, EngagementStrategy, EngineConfig, FaceObservation, normalize_emotions, validate_config
from .engine import DecisionEngine
from .policy import select_strategy
from .protocol import command_to_dict, emit_event
from .sentiment import SentimentState, classify_polarity

SCHEMA_VERSION = 1

# Typical (valence, arousal) per label, roughly following the circumplex
# placement of the basic emotions. Used unless a keyframe overrides them.
LABEL_AFFECT: dict[str, tuple[float, float]] = {
    "neutral": (0.0, 0.0),
    "happy": (0.7, 0.4),
    "surprise": (0.2, 0.7),
    "sadness": (-0.6, -0.3),
    "anger": (-0.6, 0.6),
    "fear": (-0.5, 0.7),
    "disgust": (-0.7, 0.3),
}

LABEL_WEIGHT = 0.9


class ScenarioError(ValueError):
    """Schema violations, each prefixed with its field path."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass(frozen=True)
class LatencyModel:
    """Per-frame perception delay, stages run back to back (milliseconds)."""

    face_detection_ms: float = 6.7
    head_pose_ms: float = 1.4
    emotion_ms: float = 6.3

    @property
    def total_ms(self) -> float:
        return self.face_detection_ms + self.head_pose_ms + self.emotion_ms

    @property
    def total_s(self) -> float:
        return self.total_ms / 1000.0


class EmotionKey(NamedTuple):
    t: float
    label: str
    valence: float
    arousal: float


@dataclass(frozen=True)
class PersonScript:
    track_id: int
    bearing: tuple[tuple[float, float, float], ...]  # (t, alpha, beta)
    head_offset: tuple[tuple[float, float], ...]  # (t, degrees away from camera-facing)
    emotions: tuple[EmotionKey, ...]
    size: float = 0.1
    enter: float = 0.0
    exit: float | None = None

    def present(self, t: float) -> bool:
        return self.enter <= t and (self.exit is None or t < self.exit)

    def bearing_at(self, t: float) -> Bearing:
        return Bearing(_interp(self.bearing, t, 1), _interp(self.bearing, t, 2))

    def offset_at(self, t: float) -> float:
        return _interp(self.head_offset, t, 1)

    def emotion_at(self, t: float) -> EmotionKey:
        times = [k.t for k in self.emotions]
        i = max(0, bisect.bisect_right(times, t) - 1)
        return self.emotions[i]


@dataclass(frozen=True)
class Noise:
    flicker: float = 0.0
    concentration: float | None = None
    angle_sigma: float = 0.0


@dataclass(frozen=True)
class Scenario:
    duration: float
    frame_rate: float = 30.0
    persons: tuple[PersonScript, ...] = ()
    noise: Noise = Noise()
    seed: int = 0
    name: str = "scenario"
    version: int = SCHEMA_VERSION

    @property
    def n_frames(self) -> int:
        return int(math.floor(self.duration * self.frame_rate + 1e-9))

    def frame_time(self, k: int) -> float:
        return k / self.frame_rate


def _interp(keys, t, col):
    times = [k[0] for k in keys]
    if t <= times[0]:
        return keys[0][col]
    if t >= times[-1]:
        return keys[-1][col]
    i = bisect.bisect_right(times, t)
    t0, t1 = times[i - 1], times[i]
    v0, v1 = keys[i - 1][col], keys[i][col]
    if t1 == t0:
        return v1
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0)


# ---------------------------------------------------------------------------
# loading


def _num(d, key, path, problems, default=None, lo=-math.inf, hi=math.inf):
    if key not in d:
        if default is None:
            problems.append(f"{path}.{key}: required")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        problems.append(f"{path}.{key}: must be a finite number")
        return default
    if not (lo <= v <= hi):
        problems.append(f"{path}.{key}: {v} outside [{lo}, {hi}]")
    return float(v)


def _keys(seq, path, problems, parse):
    if not isinstance(seq, list) or not seq:
        problems.append(f"{path}: must be a non-empty list of keyframes")
        return ()
    out = []
    for i, item in enumerate(seq):
        p = f"{path}[{i}]"
        if not isinstance(item, dict):
            problems.append(f"{p}: must be a mapping")
            continue
        key = parse(item, p)
        if key is None:
            continue
        if out and key[0] < out[-1][0]:
            problems.append(f"{p}.t: keyframe times must be nondecreasing")
        out.append(key)
    return tuple(out)


def scenario_from_dict(doc: Any) -> Scenario:
    """Build and validate a :class:`Scenario`; raises :class:`ScenarioError`."""
    if not isinstance(doc, dict):
        raise ScenarioError(["<root>: must be a mapping"])
    version = doc.get("version")
    if version != SCHEMA_VERSION:
        raise ScenarioError([f"version: unsupported schema version {version!r}"])
    problems: list[str] = []
    duration = _num(doc, "duration", "<root>", problems, lo=0.0)
    rate = _num(doc, "frame_rate", "<root>", problems, default=30.0, lo=1e-9)
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        problems.append("seed: must be an unsigned integer")
        seed = 0

    nd = doc.get("noise", {}) or {}
    if not isinstance(nd, dict):
        problems.append("noise: must be a mapping")
        nd = {}
    conc = nd.get("concentration")
    if conc is not None:
        conc = _num(nd, "concentration", "noise", problems, lo=0.0)
        if conc is not None and conc <= 0:
            problems.append("noise.concentration: must be positive (or null)")
    noise = Noise(
        flicker=_num(nd, "flicker", "noise", problems, default=0.0, lo=0.0, hi=1.0),
        concentration=conc,
        angle_sigma=_num(nd, "angle_sigma", "noise", problems, default=0.0, lo=0.0),
    )

    persons = []
    seen_ids = set()
    raw_persons = doc.get("persons", []) or []
    if not isinstance(raw_persons, list):
        problems.append("persons: must be a list")
        raw_persons = []
    for i, pd in enumerate(raw_persons):
        path = f"persons[{i}]"
        if not isinstance(pd, dict):
            problems.append(f"{path}: must be a mapping")
            continue
        tid = pd.get("track_id")
        if isinstance(tid, bool) or not isinstance(tid, int) or tid < 0:
            problems.append(f"{path}.track_id: must be an unsigned integer")
            continue
        if tid in seen_ids:
            problems.append(f"{path}.track_id: duplicate id {tid}")
        seen_ids.add(tid)

        def bearing_key(item, p):
            t = _num(item, "t", p, problems, lo=0.0)
            a = _num(item, "alpha", p, problems, default=0.0, lo=-180.0, hi=180.0)
            b = _num(item, "beta", p, problems, default=0.0, lo=-89.0, hi=89.0)
            return None if t is None else (t, a, b)

        def offset_key(item, p):
            t = _num(item, "t", p, problems, lo=0.0)
            d = _num(item, "deviation", p, problems, lo=-90.0, hi=90.0)
            return None if t is None or d is None else (t, d)

        def emotion_key(item, p):
            t = _num(item, "t", p, problems, lo=0.0)
            label = item.get("label")
            if label not in EMOTIONS:
                problems.append(f"{p}.label: unknown emotion {label!r}")
                return None
            v0, a0 = LABEL_AFFECT[label]
            v = _num(item, "valence", p, problems, default=v0, lo=-1.0, hi=1.0)
            a = _num(item, "arousal", p, problems, default=a0, lo=-1.0, hi=1.0)
            return None if t is None else EmotionKey(t, label, v, a)

        bearing = _keys(pd.get("bearing", [{"t": 0.0}]), f"{path}.bearing", problems, bearing_key)
        offset = _keys(pd.get("head_offset", [{"t": 0.0, "deviation": 0.0}]), f"{path}.head_offset", problems, offset_key)
        emotions = _keys(pd.get("emotions"), f"{path}.emotions", problems, emotion_key)
        size = _num(pd, "size", path, problems, default=0.1, lo=1e-6, hi=1.0)
        enter = _num(pd, "enter", path, problems, default=0.0, lo=0.0)
        exit_ = pd.get("exit")
        if exit_ is not None:
            exit_ = _num(pd, "exit", path, problems, lo=0.0)
        if bearing and offset and emotions:
            persons.append(PersonScript(tid, bearing, offset, emotions, size, enter, exit_))

    if problems:
        raise ScenarioError(problems)
    return Scenario(
        duration=duration,
        frame_rate=rate,
        persons=tuple(sorted(persons, key=lambda p: p.track_id)),
        noise=noise,
        seed=seed,
        name=str(doc.get("name", "scenario")),
    )


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError([f"<root>: not a valid document ({exc})"]) from None
    return scenario_from_dict(doc)


def demo_scenario_path() -> Path:
    return Path(str(resources.files("engage") / "data" / "demo_scenario.yaml"))


# ---------------------------------------------------------------------------
# synthesis


def head_pose_for(bearing: Bearing, deviation: float) -> tuple[float, float]:
    """(yaw, pitch) of a head at ``bearing`` turned ``deviation`` degrees away
    from looking straight at the camera.

    The turn is about the head's own vertical axis, so the resulting
    attention deviation is exactly ``|deviation|``. Positive turns toward
    image-right.
    """
    c = [-x for x in direction(bearing.alpha, bearing.beta)]
    # vertical axis orthogonal to c
    k = [0.0 - c[1] * c[0], 1.0 - c[1] * c[1], 0.0 - c[1] * c[2]]
    n = math.sqrt(sum(x * x for x in k))
    k = [x / n for x in k]
    th = -math.radians(deviation)
    kxc = (k[1] * c[2] - k[2] * c[1], k[2] * c[0] - k[0] * c[2], k[0] * c[1] - k[1] * c[0])
    kc = sum(a * b for a, b in zip(k, c))
    cos, sin = math.cos(th), math.sin(th)
    f = [c[i] * cos + kxc[i] * sin + k[i] * kc * (1 - cos) for i in range(3)]
    yaw = math.degrees(math.atan2(f[0], -f[2]))
    pitch = math.degrees(math.asin(max(-1.0, min(1.0, f[1]))))
    return yaw, pitch


def _mean_distribution(label: str) -> np.ndarray:
    other = (1.0 - LABEL_WEIGHT) / (len(EMOTIONS) - 1)
    return np.array([LABEL_WEIGHT if e == label else other for e in EMOTIONS])


@dataclass(frozen=True)
class SyntheticFrame:
    frame: int
    t: float
    track_id: int
    label: str  # label actually rendered (after flicker)
    scripted_label: str
    flickered: bool
    visible: bool
    observation: FaceObservation | None


class _PersonStream:
    """Seeded noise source for one person. Draws the same amount per frame
    whether or not the face ends up visible."""

    def __init__(self, person: PersonScript, seed: int):
        self.person = person
        self.rng = np.random.default_rng([seed, person.track_id])

    def frame(self, k: int, t: float, noise: Noise, cfg: EngineConfig, pose: RobotState) -> SyntheticFrame | None:
        person = self.person
        u_flick, u_label = self.rng.random(2)
        angle_noise = self.rng.standard_normal(3) * noise.angle_sigma
        key = person.emotion_at(t)
        label = key.label
        flickered = bool(u_flick < noise.flicker)
        if flickered:
            others = [e for e in EMOTIONS if e != key.label]
            label = others[min(int(u_label * len(others)), len(others) - 1)]
        mean = _mean_distribution(label)
        if noise.concentration is not None:
            probs = self.rng.dirichlet(noise.concentration * mean)
        else:
            probs = mean
        if not person.present(t):
            return None

        if flickered:
            valence, arousal = LABEL_AFFECT[label]
        else:
            valence, arousal = key.valence, key.arousal

        world = person.bearing_at(t)
        cam = Bearing(world.alpha - pose.base_heading - pose.head_pan, world.beta - pose.head_tilt)
        visible = abs(cam.alpha) <= cfg.hfov / 2 and abs(cam.beta) <= cfg.vfov / 2
        obs = None
        if visible:
            yaw, pitch = head_pose_for(cam, person.offset_at(t))
            cx, cy = bbox_center_from_bearing(cam, cfg.hfov, cfg.vfov)
            obs = FaceObservation(
                timestamp=t,
                track_id=person.track_id,
                bbox=(min(1.0, max(0.0, cx)), min(1.0, max(0.0, cy)), person.size, person.size),
                yaw=float(np.clip(yaw + angle_noise[0], -90.0, 90.0)),
                pitch=float(np.clip(pitch + angle_noise[1], -90.0, 90.0)),
                roll=float(np.clip(angle_noise[2], -180.0, 180.0)),
                emotions=normalize_emotions(dict(zip(EMOTIONS, (float(p) for p in probs)))),
                valence=valence,
                arousal=arousal,
            )
        return SyntheticFrame(k, t, person.track_id, label, key.label, flickered, visible, obs)


def synthesize_frames(sc: Scenario, cfg: EngineConfig | None = None) -> list[SyntheticFrame]:
    """Render every frame with the camera held at its rest pose."""
    cfg = cfg or EngineConfig()
    streams = [_PersonStream(p, sc.seed) for p in sc.persons]
    pose = RobotState()
    out = []
    for k in range(sc.n_frames):
        t = sc.frame_time(k)
        for s in streams:
            f = s.frame(k, t, sc.noise, cfg, pose)
            if f is not None:
                out.append(f)
    return out


def synthesize_events(sc: Scenario, cfg: EngineConfig | None = None) -> list[FaceObservation]:
    """Ordered perception events for a static camera (open loop)."""
    return [f.observation for f in synthesize_frames(sc, cfg) if f.visible]


# ---------------------------------------------------------------------------
# ground truth


def oracle_strategy(sc: Scenario, t: float, cfg: EngineConfig | None = None) -> dict[int, EngagementStrategy]:
    """Instantaneous strategy per present person from the noise-free script."""
    cfg = cfg or EngineConfig()
    if not (0.0 <= t <= sc.duration):
        raise ValueError(f"t={t} outside [0, {sc.duration}]")
    out = {}
    for person in sc.persons:
        if not person.present(t):
            continue
        key = person.emotion_at(t)
        emotions = normalize_emotions(dict(zip(EMOTIONS, _mean_distribution(key.label).tolist())))
        polarity = classify_polarity(emotions, key.valence, cfg)
        bearing = person.bearing_at(t)
        yaw, pitch = head_pose_for(bearing, person.offset_at(t))
        att = attention_score(yaw, pitch, bearing, cfg)
        out[person.track_id] = select_strategy(SentimentState(polarity, att.attentive), cfg)
    return out


# ---------------------------------------------------------------------------
# running


@dataclass
class ScenarioReport:
    name: str
    seed: int
    frame_rate: float
    n_frames: int
    timelines: dict[int, list[tuple[float, str | None]]]
    commands: list[dict]
    metrics: dict
    latency: dict
    rows: list[dict] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "name": self.name,
            "seed": self.seed,
            "frame_rate": self.frame_rate,
            "frames": self.n_frames,
            "metrics": self.metrics,
            "latency": self.latency,
            "timelines": {str(k): [list(e) for e in v] for k, v in sorted(self.timelines.items())},
            "commands": self.commands,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def timeline_csv(self) -> str:
        buf = io.StringIO()
        cols = ["frame", "t", "track_id", "visible", "oracle", "emitted", "target"]
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow(row)
        return buf.getvalue()

    def final_strategy(self, track_id: int) -> str | None:
        tl = self.timelines.get(track_id)
        return tl[-1][1] if tl else None

    def count(self, cmd: str, target: int | None = None) -> int:
        return sum(
            1 for c in self.commands if c["cmd"] == cmd and (target is None or c["target"] == target)
        )


def transition_window(cfg: EngineConfig) -> int:
    return max(cfg.majority_count, cfg.dwell) + cfg.window


def run_scenario(sc: Scenario, cfg: EngineConfig | None = None, latency: LatencyModel | None = None) -> ScenarioReport:
    """Run the closed loop for every frame and collect metrics.

    Each frame's decision is stamped at frame time plus the modeled
    perception delay; no wall-clock time enters the report.
    """
    cfg = validate_config(replace(cfg or EngineConfig(), frame_rate=sc.frame_rate))
    latency = latency or LatencyModel()
    delay = latency.total_s
    engine = DecisionEngine(cfg)
    streams = [_PersonStream(p, sc.seed) for p in sc.persons]

    commands: list[dict] = []
    timelines: dict[int, list[tuple[float, str | None]]] = {}
    rows: list[dict] = []
    emitted: dict[int, list[EngagementStrategy | None]] = {p.track_id: [] for p in sc.persons}
    oracle: dict[int, list[EngagementStrategy | None]] = {p.track_id: [] for p in sc.persons}
    visible: dict[int, list[bool]] = {p.track_id: [] for p in sc.persons}
    avert_devs: list[float] = []
    max_stamp_err = 0.0
    flickers = 0

    for k in range(sc.n_frames):
        t = sc.frame_time(k)
        pose = engine.robot
        frames = {}
        for s in streams:
            f = s.frame(k, t, sc.noise, cfg, pose)
            if f is not None:
                frames[f.track_id] = f
                flickers += f.flickered
                if f.visible:
                    engine.observe(f.observation)
        now = t + delay
        cmds = engine.decide(now)
        truth = oracle_strategy(sc, min(t, sc.duration), cfg)

        for c in cmds:
            max_stamp_err = max(max_stamp_err, abs(c.t - (k / sc.frame_rate + delay)))
            commands.append(command_to_dict(c))
            if isinstance(c, AvertGaze):
                person = next(p for p in sc.persons if p.track_id == c.target)
                world = person.bearing_at(t)
                avert_devs.append(
                    optical_deviation(
                        world.alpha - engine.robot.base_heading - c.pan, world.beta - c.tilt
                    )
                )
        target = next((c.target for c in cmds if c.target is not None), None)

        for p in sc.persons:
            tid = p.track_id
            cur = engine.strategies.get(tid)
            tl = timelines.setdefault(tid, [])
            name = cur.value if cur is not None else None
            if (tl[-1][1] if tl else None) != name:
                tl.append((now, name))
            emitted[tid].append(cur)
            oracle[tid].append(truth.get(tid))
            f = frames.get(tid)
            visible[tid].append(bool(f and f.visible))
            if tid in truth:
                rows.append({
                    "frame": k,
                    "t": t,
                    "track_id": tid,
                    "visible": int(bool(f and f.visible)),
                    "oracle": truth[tid].value,
                    "emitted": name or "",
                    "target": int(target == tid),
                })

    timelines = {tid: tl for tid, tl in timelines.items() if tl}
    metrics = _metrics(emitted, oracle, visible, transition_window(cfg))
    metrics.update(
        speak_count=sum(1 for c in commands if c["cmd"] == Speak.kind),
        avert_count=len(avert_devs),
        min_avert_deviation=min(avert_devs) if avert_devs else None,
        flicker_count=flickers,
        final_strategies={str(tid): tl[-1][1] for tid, tl in sorted(timelines.items())},
    )
    lat = {
        "face_detection_ms": latency.face_detection_ms,
        "head_pose_ms": latency.head_pose_ms,
        "emotion_ms": latency.emotion_ms,
        "perception_total_ms": latency.total_ms,
        "decision_offset_s": delay,
        "decisions": sc.n_frames,
        "max_timestamp_error_s": max_stamp_err,
    }
    return ScenarioReport(sc.name, sc.seed, sc.frame_rate, sc.n_frames, timelines, commands, metrics, lat, rows)


def _metrics(emitted, oracle, visible, window: int) -> dict:
    switches = 0
    delays: list[int] = []
    unreached = 0
    agree = total = 0
    for tid in emitted:
        em, orc, vis = emitted[tid], oracle[tid], visible[tid]
        prev = None
        for s in em:
            if s is not None and s != prev:
                switches += 1
            prev = s
        changes = [k for k in range(len(orc)) if orc[k] is not None and (k == 0 or orc[k] != orc[k - 1])]
        excluded = set()
        for i, c in enumerate(changes):
            excluded.update(range(c, c + window))
            end = changes[i + 1] if i + 1 < len(changes) else len(orc)
            if c > 0 and em[c - 1] == orc[c]:
                continue
            hit = next((k for k in range(c, end) if em[k] == orc[c]), None)
            if hit is None:
                unreached += 1
            else:
                delays.append(hit - c + 1)
        for k in range(len(orc)):
            if orc[k] is None or not vis[k] or k in excluded:
                continue
            total += 1
            agree += em[k] == orc[k]
    return {
        "switch_count": switches,
        "reaction_delay_frames": {
            "mean": (sum(delays) / len(delays)) if delays else None,
            "max": max(delays) if delays else None,
            "count": len(delays),
            "unreached": unreached,
        },
        "agreement_fraction": (agree / total) if total else 1.0,
        "agreement_frames": total,
        "transition_window_frames": window,
    }
