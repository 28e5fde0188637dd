"""Experiment configuration: baseline defaults, TOML loading, overrides."""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from ..channel import HmtGeometry
from ..signal import NoiseModel, dbm_to_watts

SEED_ENV_VAR = "HMTPHASE_SEED"
DEFAULT_SEED = 20230517

METHODS = ("two_stage", "oracle", "grid_search")
CENTER_MODES = ("stage0", "perturbed", "fixed")


class ConfigError(ValueError):
    """Bad configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(SEED_ENV_VAR, f"not an integer: {raw!r}") from None


@dataclass
class ExperimentConfig:
    # geometry: 1 m x 1 m surface at 30 GHz, quarter-wave spacing
    wavelength: float = 0.01
    width: float = 1.0
    length: float = 1.0
    spacing: float = 0.0025
    # link
    distances: list[float] = field(default_factory=lambda: [200.0])
    alpha: tuple[float, float] = (0.68, -0.45)
    random_user: bool = False
    radiation_factor: float = 1.0
    # noise
    sigma2_dbm: float = -115.0
    nlos_paths: int = 4
    nlos_offset_db: float = -20.0
    # sweep
    pilot_dbm: list[float] = field(default_factory=lambda: [10.0])
    pilots: list[int] = field(default_factory=lambda: [100, 1000, 10000])
    epsilons: list[float] = field(default_factory=lambda: [0.01, 0.05, 0.1])
    data_dbm: float = 20.0
    trials: int = 1000
    seed: int = field(default_factory=default_seed)
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    center_mode: str = "stage0"
    center: tuple[float, float] | None = None
    center_radius: float | None = None
    step_v: float | None = None
    step_w: float | None = None
    grid_size: int | None = None
    workers: int = 1
    # output
    csv: str | None = None
    svg: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        try:
            self.geometry()
        except ValueError as exc:
            raise ConfigError("geometry", str(exc)) from None
        if self.trials < 1:
            raise ConfigError("sweep.trials", "must be >= 1")
        if self.workers < 1:
            raise ConfigError("sweep.workers", "must be >= 1")
        if not self.distances or any(d <= 0 for d in self.distances):
            raise ConfigError("link.distances", "need positive distances")
        if any(not -1 <= a <= 1 for a in self.alpha) or len(self.alpha) != 2:
            raise ConfigError("link.alpha", "need two values in [-1, 1]")
        if any(n < 5 for n in self.pilots):
            raise ConfigError("sweep.pilots", "each pilot count must be >= 5")
        if any(not 0 <= e <= 1 for e in self.epsilons):
            raise ConfigError("sweep.epsilons", "each epsilon must lie in [0, 1]")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError("sweep.methods", f"unknown method(s) {bad}")
        if self.center_mode not in CENTER_MODES:
            raise ConfigError("sweep.center_mode", f"must be one of {CENTER_MODES}")
        if self.center_mode == "fixed" and self.center is None:
            raise ConfigError("sweep.center", "required when center_mode = 'fixed'")
        if self.nlos_paths < 0:
            raise ConfigError("noise.nlos_paths", "must be >= 0")
        if self.nlos_offset_db > 0:
            raise ConfigError("noise.nlos_offset_db", "must be <= 0")

    def geometry(self) -> HmtGeometry:
        return HmtGeometry(self.width, self.length, self.spacing, self.wavelength)

    def noise(self) -> NoiseModel:
        return NoiseModel(dbm_to_watts(self.sigma2_dbm), self.nlos_paths, self.nlos_offset_db)

    def replace(self, **changes) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)


# TOML section -> allowed keys (all map onto ExperimentConfig fields)
SECTIONS = {
    "geometry": ("wavelength", "width", "length", "spacing"),
    "link": ("distances", "alpha", "random_user", "radiation_factor"),
    "noise": ("sigma2_dbm", "nlos_paths", "nlos_offset_db"),
    "sweep": ("pilot_dbm", "pilots", "epsilons", "data_dbm", "trials", "seed",
              "methods", "center_mode", "center", "center_radius", "step_v",
              "step_w", "grid_size", "workers"),
    "output": ("csv", "svg"),
}

_TUPLE_FIELDS = {"alpha", "center"}


def flatten_toml(doc: dict[str, Any]) -> dict[str, Any]:
    """Map a parsed TOML document onto flat config field names."""
    flat: dict[str, Any] = {}
    for section, body in doc.items():
        if section not in SECTIONS:
            raise ConfigError(section, "unknown section")
        if not isinstance(body, dict):
            raise ConfigError(section, "expected a table")
        for key, value in body.items():
            if key not in SECTIONS[section]:
                raise ConfigError(f"{section}.{key}", "unknown key")
            if key in _TUPLE_FIELDS:
                value = tuple(value)
            flat[key] = value
    return flat


def load_config(path: str | os.PathLike | None = None, base: dict | None = None,
                **overrides) -> ExperimentConfig:
    """Defaults <- ``base`` <- file values <- ``overrides``.

    ``overrides`` set to None are ignored, so unset CLI flags pass through.
    """
    values: dict[str, Any] = dict(base or {})
    if path is not None:
        try:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(str(path), f"malformed TOML: {exc}") from None
        except OSError as exc:
            raise ConfigError(str(path), exc.strerror or str(exc)) from None
        values.update(flatten_toml(doc))
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from None
