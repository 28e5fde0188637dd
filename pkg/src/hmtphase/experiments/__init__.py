from .baselines import grid_search_baseline, oracle_baseline
from .config import ConfigError, ExperimentConfig, load_config
from .runner import (
    ERROR_COLUMNS,
    PRESETS,
    RATE_COLUMNS,
    TrialRecord,
    rate_vs_power_config,
    error_vs_pilots_config,
    error_vs_power_config,
    run_error_probability_sweep,
    run_point,
    run_rate_sweep,
    run_trial,
    wilson_interval,
)
from .surface import SURFACE_COLUMNS, GainSurface, gain_surface, render_gain_surface

__all__ = [
    "ConfigError", "ERROR_COLUMNS", "ExperimentConfig", "GainSurface", "PRESETS",
    "RATE_COLUMNS", "SURFACE_COLUMNS", "TrialRecord", "rate_vs_power_config", "error_vs_pilots_config",
    "error_vs_power_config", "gain_surface", "grid_search_baseline", "load_config",
    "oracle_baseline", "render_gain_surface", "run_error_probability_sweep",
    "run_point", "run_rate_sweep", "run_trial", "wilson_interval",
]
