"""Shared domain types, emotion taxonomy and engine configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Mapping, NamedTuple

# Closed 7-class taxonomy, neutral first. Index order is the canonical order
# used for argmax tie-breaking and serialization.
EMOTIONS: tuple[str, ...] = (
    "neutral",
    "happy",
    "disgust",
    "fear",
    "surprise",
    "anger",
    "sadness",
)
_EMOTION_INDEX = {name: i for i, name in enumerate(EMOTIONS)}
_EMOTION_SET = frozenset(EMOTIONS)


class ValidationError(ValueError):
    """A value violates a domain bound. ``field`` names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ConfigError(ValueError):
    """Raised with every violated configuration constraint at once."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class _FastHashEnum(Enum):
    # members are singletons compared by identity, so the C-level identity
    # hash is consistent and avoids Enum's Python-level __hash__ on hot paths
    __hash__ = object.__hash__


class Polarity(_FastHashEnum):
    POSITIVE = "positive"
    NEGATIVE_STRONG = "negative_strong"
    NEGATIVE_SOFT = "negative_soft"
    NEUTRAL = "neutral"


class EngagementStrategy(_FastHashEnum):
    ENGAGE = "engage"
    ATTRACT = "attract"
    AVOID = "avoid"
    IGNORE = "ignore"


class SentimentState(NamedTuple):
    polarity: Polarity
    attentive: bool

    def key(self) -> str:
        return f"{self.polarity.value}.{'attentive' if self.attentive else 'inattentive'}"


ALL_SENTIMENT_STATES: tuple[SentimentState, ...] = tuple(
    SentimentState(p, a) for p in Polarity for a in (True, False)
)

DEFAULT_STRATEGY_TABLE: Mapping[SentimentState, EngagementStrategy] = {
    SentimentState(Polarity.POSITIVE, True): EngagementStrategy.ENGAGE,
    SentimentState(Polarity.POSITIVE, False): EngagementStrategy.ATTRACT,
    SentimentState(Polarity.NEGATIVE_STRONG, True): EngagementStrategy.AVOID,
    SentimentState(Polarity.NEGATIVE_STRONG, False): EngagementStrategy.IGNORE,
    SentimentState(Polarity.NEGATIVE_SOFT, True): EngagementStrategy.ATTRACT,
    SentimentState(Polarity.NEGATIVE_SOFT, False): EngagementStrategy.IGNORE,
    SentimentState(Polarity.NEUTRAL, True): EngagementStrategy.ATTRACT,
    SentimentState(Polarity.NEUTRAL, False): EngagementStrategy.IGNORE,
}


@dataclass(frozen=True)
class EmotionDistribution:
    """Probabilities over :data:`EMOTIONS`, stored in canonical order.

    Build instances with :func:`normalize_emotions`; the constructor only
    checks the bounds.
    """

    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) != len(EMOTIONS):
            raise ValidationError("emotions", f"expected {len(EMOTIONS)} classes")
        for name, p in zip(EMOTIONS, self.probs):
            if not (0.0 <= p <= 1.0):
                raise ValidationError(f"emotions.{name}", f"probability {p} outside [0, 1]")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > 1e-6:
            raise ValidationError("emotions", f"probabilities sum to {total}, not 1")

    def __getitem__(self, name: str) -> float:
        return self.probs[_EMOTION_INDEX[name]]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(EMOTIONS, self.probs))

    def argmax(self) -> tuple[str, float]:
        """Dominant class and its probability; ties go to the earlier class."""
        top = max(self.probs)
        best = self.probs.index(top)
        return EMOTIONS[best], top

    @classmethod
    def _trusted(cls, probs: tuple[float, ...]) -> "EmotionDistribution":
        # skips __post_init__; only for callers that already enforced the bounds
        obj = object.__new__(cls)
        object.__setattr__(obj, "probs", probs)
        return obj

    @classmethod
    def one_hot(cls, label: str) -> "EmotionDistribution":
        return normalize_emotions({e: float(e == label) for e in EMOTIONS})


def normalize_emotions(raw: Mapping[str, float]) -> EmotionDistribution:
    """Rescale a class->score mapping so it sums to one.

    All seven class keys must be present. Unknown keys, negative or
    non-finite values and an all-zero input are rejected.
    """
    if len(raw) != len(EMOTIONS) or not _EMOTION_SET.issuperset(raw):
        unknown = sorted(set(raw) - _EMOTION_SET)
        if unknown:
            raise ValidationError("emotions", f"unknown class {unknown[0]!r}")
        missing = next(name for name in EMOTIONS if name not in raw)
        raise ValidationError("emotions", f"missing class {missing!r}")
    values = []
    for name in EMOTIONS:
        v = raw[name]
        if type(v) is not float:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValidationError(f"emotions.{name}", "not a number")
            v = float(v)
        if not (0.0 <= v < math.inf):  # also rejects NaN
            raise ValidationError(f"emotions.{name}", f"invalid value {v}")
        values.append(v)
    total = math.fsum(values)
    if total < 1e-6:
        raise ValidationError("emotions", "degenerate distribution (sum < 1e-6)")
    return EmotionDistribution._trusted(tuple([v / total for v in values]))


def _in_range(name: str, value: float, lo: float, hi: float) -> float:
    if type(value) is not float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(name, "not a number")
        value = float(value)
    if not (lo <= value <= hi):  # also rejects NaN
        raise ValidationError(name, f"{value} outside [{lo}, {hi}]")
    return value


@dataclass(frozen=True)
class FaceObservation:
    """One timestamped perception sample for one tracked face.

    Angles are degrees in the camera frame: positive yaw turns the face
    toward image-right, positive pitch tilts it up. ``bbox`` is
    ``(cx, cy, w, h)`` in normalized image coordinates.
    """

    timestamp: float
    track_id: int
    bbox: tuple[float, float, float, float]
    yaw: float
    pitch: float
    roll: float
    emotions: EmotionDistribution
    valence: float
    arousal: float

    def __post_init__(self):
        t = self.timestamp
        if isinstance(t, bool) or not isinstance(t, (int, float)) or not math.isfinite(t):
            raise ValidationError("t", "timestamp must be a finite number")
        if isinstance(self.track_id, bool) or not isinstance(self.track_id, int) or self.track_id < 0:
            raise ValidationError("track_id", "must be an unsigned integer")
        if len(self.bbox) != 4:
            raise ValidationError("bbox", "expected [cx, cy, w, h]")
        cx, cy, w, h = self.bbox
        _in_range("bbox.cx", cx, 0.0, 1.0)
        _in_range("bbox.cy", cy, 0.0, 1.0)
        if _in_range("bbox.w", w, 0.0, 1.0) == 0.0:
            raise ValidationError("bbox.w", "width must be > 0")
        if _in_range("bbox.h", h, 0.0, 1.0) == 0.0:
            raise ValidationError("bbox.h", "height must be > 0")
        _in_range("yaw", self.yaw, -90.0, 90.0)
        _in_range("pitch", self.pitch, -90.0, 90.0)
        _in_range("roll", self.roll, -180.0, 180.0)
        _in_range("valence", self.valence, -1.0, 1.0)
        _in_range("arousal", self.arousal, -1.0, 1.0)
        if not isinstance(self.emotions, EmotionDistribution):
            raise ValidationError("emotions", "expected an EmotionDistribution")


@dataclass(frozen=True)
class EngineConfig:
    """Tunable engine parameters. Angles in degrees, rates per second.

    None of the defaults are measured values; they are engineering choices
    that can all be overridden from a config file.
    """

    hfov: float = 58.0
    vfov: float = 45.0
    attention_half_angle: float = 15.0
    polarity_min_confidence: float = 0.4
    valence_pos: float = 0.2
    valence_neg: float = -0.2
    window: int = 15
    dwell: int = 5
    majority: float = 0.6
    head_yaw_limit: float = 60.0
    avert_half_angle: float = 10.0
    head_pan_rate: float = 90.0
    base_rotate_rate: float = 30.0
    frame_rate: float = 30.0
    track_timeout: float = 1.0
    greeting: str = "Hello! Can I help you?"
    port: int = 7878
    strategy_table: Mapping[SentimentState, EngagementStrategy] = field(
        default_factory=lambda: dict(DEFAULT_STRATEGY_TABLE)
    )

    @property
    def majority_count(self) -> int:
        """Window votes a candidate state needs before it may be adopted."""
        # round first so 0.6 * 15 does not become 9.000000000000002 -> 10
        return math.ceil(round(self.majority * self.window, 9))

    def replace(self, **changes) -> "EngineConfig":
        return replace(self, **changes)


def config_violations(cfg: EngineConfig) -> list[str]:
    out: list[str] = []

    def num(name):
        v = getattr(cfg, name)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            out.append(f"{name}: must be a finite number")
            return None
        return v

    hfov, vfov = num("hfov"), num("vfov")
    for name, v in (("hfov", hfov), ("vfov", vfov)):
        if v is not None and not (0 < v < 180):
            out.append(f"{name}: field of view must lie in (0, 180) degrees")
    att = num("attention_half_angle")
    if att is not None and hfov is not None and vfov is not None:
        if not (0 < att < min(hfov, vfov) / 2):
            out.append(
                "attention_half_angle: must satisfy 0 < attention_half_angle < FOV/2 "
                f"(= {min(hfov, vfov) / 2})"
            )
    avert = num("avert_half_angle")
    if avert is not None and hfov is not None and not (0 < avert < hfov / 2):
        out.append(f"avert_half_angle: must satisfy 0 < avert_half_angle < hfov/2 (= {hfov / 2})")
    pmin = num("polarity_min_confidence")
    if pmin is not None and not (0 < pmin <= 1):
        out.append("polarity_min_confidence: must lie in (0, 1]")
    vpos, vneg = num("valence_pos"), num("valence_neg")
    if vpos is not None and vneg is not None:
        if not (-1 <= vneg < vpos <= 1):
            out.append("valence_neg/valence_pos: need -1 <= valence_neg < valence_pos <= 1")
    window, dwell = cfg.window, cfg.dwell
    ints_ok = True
    for name, v in (("window", window), ("dwell", dwell)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            out.append(f"{name}: must be a positive integer")
            ints_ok = False
    if ints_ok and dwell > window:
        out.append(f"dwell: dwell exceeds window ({dwell} > {window})")
    m = num("majority")
    if m is not None and not (0.5 < m <= 1):
        out.append("majority: majority fraction must exceed 0.5 (and be <= 1)")
    for name in ("head_yaw_limit", "head_pan_rate", "base_rotate_rate", "frame_rate", "track_timeout"):
        v = num(name)
        if v is not None and v <= 0:
            out.append(f"{name}: must be > 0")
    if not isinstance(cfg.greeting, str) or not cfg.greeting.strip():
        out.append("greeting: must be non-empty text")
    if isinstance(cfg.port, bool) or not isinstance(cfg.port, int) or not (0 <= cfg.port <= 65535):
        out.append("port: must be an integer in [0, 65535]")
    out.extend(table_violations(cfg.strategy_table))
    return out


def table_violations(table: Mapping) -> list[str]:
    out = []
    for state in ALL_SENTIMENT_STATES:
        if state not in table:
            out.append(f"strategy_table: missing cell {state.key()}")
        elif not isinstance(table[state], EngagementStrategy):
            out.append(f"strategy_table: cell {state.key()} is not a strategy")
    for key in table:
        if key not in ALL_SENTIMENT_STATES:
            out.append(f"strategy_table: unknown cell {key!r}")
    return out


def validate_config(cfg: EngineConfig) -> EngineConfig:
    """Return ``cfg`` unchanged if every constraint holds, else raise
    :class:`ConfigError` listing all violations."""
    violations = config_violations(cfg)
    if violations:
        raise ConfigError(violations)
    return cfg


# ---------------------------------------------------------------------------
# config file: `key = value` lines, `#` comments

_ATTENTION_WORDS = {"attentive": True, "inattentive": False}


def _parse_value(name: str, text: str, kind):
    if kind is str:
        if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
            return text[1:-1]
        return text
    if kind is int:
        return int(text)
    return float(text)


def parse_config(text: str, base: EngineConfig | None = None) -> EngineConfig:
    """Parse config text into a validated :class:`EngineConfig`.

    Unset keys keep the values of ``base`` (defaults when omitted). Table
    lines look like ``negative_soft.attentive = attract``; if any appear,
    all eight must.
    """
    base = base or EngineConfig()
    kinds = {f.name: f.type for f in fields(EngineConfig) if f.name != "strategy_table"}
    kinds = {k: {"float": float, "int": int, "str": str}[v] for k, v in kinds.items()}
    polarities = {p.value: p for p in Polarity}
    strategies = {s.value: s for s in EngagementStrategy}

    values: dict[str, object] = {}
    table: dict[SentimentState, EngagementStrategy] = {}
    errors: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in kinds or kinds[key] is not str:
            value = value.split("#", 1)[0].strip()
        if "." in key:
            pol, _, att = key.partition(".")
            if pol not in polarities or att not in _ATTENTION_WORDS:
                errors.append(f"line {lineno}: unknown table cell {key!r}")
            elif value.lower() not in strategies:
                errors.append(f"line {lineno}: unknown strategy {value!r} for {key}")
            else:
                table[SentimentState(polarities[pol], _ATTENTION_WORDS[att])] = strategies[value.lower()]
            continue
        if key not in kinds:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        try:
            values[key] = _parse_value(key, value, kinds[key])
        except ValueError:
            errors.append(f"line {lineno}: {key}: cannot parse {value!r}")
    if errors:
        raise ConfigError(errors)
    if table:
        values["strategy_table"] = table
    return validate_config(replace(base, **values))


def load_config(path: str | Path) -> EngineConfig:
    """Read and validate a config file. I/O errors propagate as ``OSError``."""
    return parse_config(Path(path).read_text(encoding="utf-8"))


def format_config(cfg: EngineConfig) -> str:
    """Render ``cfg`` in config-file syntax (round-trips through :func:`parse_config`)."""
    lines = []
    for f in fields(EngineConfig):
        if f.name == "strategy_table":
            continue
        lines.append(f"{f.name} = {getattr(cfg, f.name)}")
    for state in ALL_SENTIMENT_STATES:
        lines.append(f"{state.key()} = {cfg.strategy_table[state].value}")
    return "\n".join(lines) + "\n"

