"""Sentiment-driven engagement decisions for a social robot.

Perception events (head pose, emotion distribution, valence/arousal per
tracked face) go in; head, body, torso and speech commands come out.
"""

from .arbiter import (
    AvertGaze,
    BodyRotate,
    HeadFollow,
    Idle,
    RobotCommand,
    RobotState,
    Speak,
    TorsoLift,
    plan_commands,
    reset_episode,
    select_target,
)
from .attention import AttentionEstimate, Bearing, attention_score, bearing_from_bbox, estimate_attention
from .core import (
    EMOTIONS,
    ConfigError,
    EmotionDistribution,
    EngagementStrategy,
    EngineConfig,
    FaceObservation,
    Polarity,
    SentimentState,
    ValidationError,
    load_config,
    normalize_emotions,
    parse_config,
    validate_config,
)
from .engine import DecisionEngine
from .policy import select_strategy
from .protocol import ProtocolError, emit_command, emit_event, parse_command, parse_event
from .sentiment import TrackState, classify_polarity, expire_tracks, update_track
from .simulator import (
    LatencyModel,
    Scenario,
    ScenarioReport,
    load_scenario,
    oracle_strategy,
    run_scenario,
    synthesize_events,
)

__version__ = "0.1.0"
