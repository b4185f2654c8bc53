"""Entropy-gated switching between concise and thinking decoding modes."""

from ._core import (
    BackendError,
    ConfigError,
    Controller,
    ControllerConfig,
    ControllerDecision,
    EpisodeResult,
    InvalidVocabularyError,
    LogicError,
    Mode,
    WindowAction,
    normalized_entropy,
    replay,
    run_cli,
    run_scripted,
)

__all__ = [
    "BackendError",
    "ConfigError",
    "Controller",
    "ControllerConfig",
    "ControllerDecision",
    "EpisodeResult",
    "InvalidVocabularyError",
    "LogicError",
    "Mode",
    "WindowAction",
    "normalized_entropy",
    "replay",
    "run_cli",
    "run_scripted",
]
__version__ = "0.1.0"
