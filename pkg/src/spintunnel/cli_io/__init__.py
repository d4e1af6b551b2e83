"""Presets, sweeps, CSV/JSON output and the command-line entry point."""

from .output import emit, format_value, render
from .presets import PRESETS, ConfigError, Preset, load_preset, parse_config, serialize_preset
from .sweep import GridRange, SweepSpec, SweepTable, ValidationError, run_sweep

__all__ = [
    "PRESETS",
    "ConfigError",
    "GridRange",
    "Preset",
    "SweepSpec",
    "SweepTable",
    "ValidationError",
    "emit",
    "format_value",
    "load_preset",
    "parse_config",
    "render",
    "run_sweep",
    "serialize_preset",
]
