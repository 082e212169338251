"""Sentiment state -> engagement strategy lookup."""

from __future__ import annotations

from .core import (
    ALL_SENTIMENT_STATES,
    DEFAULT_STRATEGY_TABLE,
    ConfigError,
    EngagementStrategy,
    EngineConfig,
    SentimentState,
    table_violations,
)

__all__ = [
    "EngagementStrategy",
    "DEFAULT_STRATEGY_TABLE",
    "ALL_SENTIMENT_STATES",
    "select_strategy",
    "check_table",
]


def check_table(table) -> None:
    """Raise :class:`ConfigError` unless ``table`` covers all eight cells."""
    violations = table_violations(table)
    if violations:
        raise ConfigError(violations)


def select_strategy(state: SentimentState, cfg: EngineConfig) -> EngagementStrategy:
    # totality is checked when the config is loaded
    return cfg.strategy_table[state]
