"""Simulation loop, configuration, sweeps, result files and the CLI."""

from .config import ConfigError, RunConfig, config_from_dict, load_config
from .simulation import LOOP_CASES, RunSummary, Simulation, StepRecord, loop_case, run, system_streams

__all__ = [
    "ConfigError",
    "LOOP_CASES",
    "RunConfig",
    "RunSummary",
    "Simulation",
    "StepRecord",
    "config_from_dict",
    "load_config",
    "loop_case",
    "run",
    "system_streams",
]
