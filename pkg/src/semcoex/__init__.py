"""Beamforming and downsampling-depth selection for coexisting semantic and bit users."""
from .model import (
    Beamformer,
    ChannelSet,
    ConfigError,
    SolveReport,
    SolverOptions,
    SystemConfig,
    default_config,
    validate_config,
)
from .semrate import SemanticRateModel, default_model, fit, rate, symbols_for_depth

__all__ = [
    "Beamformer",
    "ChannelSet",
    "ConfigError",
    "SemanticRateModel",
    "SolveReport",
    "SolverOptions",
    "SystemConfig",
    "default_config",
    "default_model",
    "fit",
    "rate",
    "symbols_for_depth",
    "validate_config",
]
