"""Stateful decision loop: observations in, robot commands out."""

from __future__ import annotations

from typing import NamedTuple

from .arbiter import Candidate, Idle, RobotCommand, RobotState, plan_commands, reset_episode, select_target
from .attention import Bearing, bearing_from_bbox, estimate_attention
from .core import EngagementStrategy, EngineConfig, FaceObservation, validate_config
from .policy import select_strategy
from .sentiment import TrackState, expire_tracks, update_track


class Sighting(NamedTuple):
    """Last place a track was seen, in the robot's odometry frame (degrees)."""

    bbox: tuple
    azimuth: float
    elevation: float


class DecisionEngine:
    """Tracks every face, arbitrates one target and plans commands for it.

    Call :meth:`observe` for each perception event and :meth:`decide` once per
    decision tick, or :meth:`process` to do both for a single event.
    Decisions must be made in nondecreasing time order.
    """

    def __init__(self, cfg: EngineConfig | None = None, robot: RobotState | None = None):
        self.cfg = validate_config(cfg or EngineConfig())
        self.robot = robot or RobotState()
        self.tracks: dict[int, TrackState] = {}
        self.sightings: dict[int, Sighting] = {}
        self.strategies: dict[int, EngagementStrategy | None] = {}
        self.last_decision: float | None = None

    def observe(self, obs: FaceObservation) -> EngagementStrategy | None:
        cfg = self.cfg
        tid = obs.track_id
        track = self.tracks.get(tid)
        if track is None:
            track = self.tracks[tid] = TrackState.fresh(tid, cfg)
        b = bearing_from_bbox(obs.bbox, cfg.hfov, cfg.vfov)
        _, state = update_track(track, obs, estimate_attention(obs, cfg, b), cfg)

        r = self.robot
        self.sightings[tid] = Sighting(
            obs.bbox, r.base_heading + r.head_pan + b.alpha, r.head_tilt + b.beta
        )

        strategy = None if state is None else select_strategy(state, cfg)
        if strategy != self.strategies.get(tid):
            if self.strategies.get(tid) is EngagementStrategy.ENGAGE:
                self.robot = reset_episode(self.robot, tid)
        self.strategies[tid] = strategy
        return strategy

    def expire(self, now: float) -> list[int]:
        timeout = self.cfg.track_timeout
        if all(now - tr.last_timestamp <= timeout for tr in self.tracks.values()):
            return []
        alive = expire_tracks(self.tracks, now, self.cfg.track_timeout)
        gone = [tid for tid in self.tracks if tid not in alive]
        for tid in gone:
            self.robot = reset_episode(self.robot, tid)
            self.strategies.pop(tid, None)
            self.sightings.pop(tid, None)
        self.tracks = alive
        return gone

    def bearing_of(self, tid: int) -> Bearing:
        s, r = self.sightings[tid], self.robot
        return Bearing(s.azimuth - r.base_heading - r.head_pan, s.elevation - r.head_tilt)

    def decide(self, now: float) -> list[RobotCommand]:
        self.expire(now)
        candidates = [
            Candidate(tid, self.tracks[tid].current, strategy, self.sightings[tid].bbox)
            for tid, strategy in self.strategies.items()
            if strategy is not None
        ]
        if self.last_decision is None:
            dt = 1.0 / self.cfg.frame_rate
        else:
            dt = max(0.0, now - self.last_decision)
        self.last_decision = now

        target = select_target(candidates)
        if target is None:
            return [Idle(t=now)]
        self.robot, cmds = plan_commands(
            self.strategies[target], self.bearing_of(target), self.robot, self.cfg,
            target=target, t=now, dt=dt,
        )
        return cmds

    def process(self, obs: FaceObservation, latency: float = 0.0) -> list[RobotCommand]:
        self.observe(obs)
        return self.decide(obs.timestamp + latency)
