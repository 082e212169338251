"""Per-frame emotion polarity and per-track temporal filtering.

Single-frame classifier outputs flicker: expressions change for a frame or
two and short glances make the head pose oscillate. Each track therefore
keeps a window of recent (polarity, attentive) votes and only adopts a new
sentiment state once it holds a qualified majority of the window *and* has
been observed for ``dwell`` consecutive frames.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Mapping

from .attention import AttentionEstimate
from .core import (
    EmotionDistribution,
    EngineConfig,
    FaceObservation,
    Polarity,
    SentimentState,
    ValidationError,
)

__all__ = [
    "Polarity",
    "SentimentState",
    "TrackState",
    "classify_polarity",
    "update_track",
    "expire_tracks",
]

_LABEL_POLARITY = {
    "happy": Polarity.POSITIVE,
    "fear": Polarity.NEGATIVE_STRONG,
    "disgust": Polarity.NEGATIVE_STRONG,
    "anger": Polarity.NEGATIVE_STRONG,
    "sadness": Polarity.NEGATIVE_SOFT,
    "neutral": Polarity.NEUTRAL,
}


def classify_polarity(emotions: EmotionDistribution, valence: float, cfg: EngineConfig) -> Polarity:
    """Coarse polarity of one frame.

    A confident dominant class decides directly (surprise goes by the sign of
    valence). Below ``polarity_min_confidence`` the valence thresholds decide.
    """
    label, p = emotions.argmax()
    if p >= cfg.polarity_min_confidence:
        if label == "surprise":
            return Polarity.POSITIVE if valence >= 0 else Polarity.NEGATIVE_SOFT
        return _LABEL_POLARITY[label]
    if valence >= cfg.valence_pos:
        return Polarity.POSITIVE
    if valence <= cfg.valence_neg:
        return Polarity.NEGATIVE_SOFT
    return Polarity.NEUTRAL


@dataclass
class TrackState:
    """Filter state for one track. Owned by a single caller; not thread-safe."""

    track_id: int
    window: int = 15
    votes: deque = field(default=None)  # (polarity, attentive) pairs, newest last
    counts: Counter = field(default_factory=Counter)
    current: SentimentState | None = None
    candidate: SentimentState | None = None
    dwell: int = 0  # trailing frames equal to the candidate, capped at cfg.dwell
    run: int = 0  # trailing frames equal to the newest vote
    last_timestamp: float = float("-inf")

    def __post_init__(self):
        if self.votes is None:
            self.votes = deque(maxlen=self.window)

    @classmethod
    def fresh(cls, track_id: int, cfg: EngineConfig) -> "TrackState":
        return cls(track_id=track_id, window=cfg.window)


def _modal(state: TrackState) -> SentimentState:
    top = max(state.counts.values())
    tied = [s for s, c in state.counts.items() if c == top]
    if len(tied) == 1:
        return tied[0]
    if state.current in tied:
        return state.current
    # otherwise prefer the pair seen most recently
    for vote in reversed(state.votes):
        if vote in tied:
            return vote
    raise AssertionError("unreachable")


def update_track(
    state: TrackState, obs: FaceObservation, att: AttentionEstimate, cfg: EngineConfig
) -> tuple[TrackState, SentimentState | None]:
    """Push one frame into the track's window and return the filtered state.

    The state switches to the modal (polarity, attentive) pair only when that
    pair fills at least ``ceil(majority * window)`` slots and the last
    ``dwell`` frames all voted for it. ``state`` is updated in place and
    returned for convenience. A fresh track reports ``None`` until its first
    switch.
    """
    if obs.timestamp < state.last_timestamp:
        raise ValidationError(
            "t",
            f"out-of-order timestamp for track {state.track_id}: "
            f"{obs.timestamp} < {state.last_timestamp}",
        )
    state.last_timestamp = obs.timestamp
    vote = SentimentState(classify_polarity(obs.emotions, obs.valence, cfg), att.attentive)

    votes = state.votes
    if len(votes) == votes.maxlen:
        old = votes[0]
        state.counts[old] -= 1
        if not state.counts[old]:
            del state.counts[old]
    state.run = state.run + 1 if votes and votes[-1] == vote else 1
    votes.append(vote)
    state.counts[vote] += 1

    candidate = _modal(state)
    state.candidate = candidate
    state.dwell = min(state.run, cfg.dwell) if candidate == vote else 0

    if (
        candidate != state.current
        and state.counts[candidate] >= cfg.majority_count
        and state.dwell >= cfg.dwell
    ):
        state.current = candidate
    return state, state.current


def expire_tracks(states: Mapping[int, TrackState], now: float, timeout: float) -> dict[int, TrackState]:
    """Drop tracks not seen for more than ``timeout`` seconds."""
    if timeout <= 0:
        raise ValueError("timeout must be > 0")
    return {tid: s for tid, s in states.items() if now - s.last_timestamp <= timeout}
