"""Monte Carlo trial harness and the error-probability / rate sweeps.

Randomness layout: trial ``t`` owns ``RngStream(seed, t)``; its children are
keyed by purpose (user draw, NLoS draw, centre jitter, two-stage pilots, grid
pilots). The same trial index therefore sees the same user and noise at every
sweep point, and results never depend on worker scheduling.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm
from statsmodels.stats.proportion import proportion_confint

from ..bounds import BoundParams, error_probability_bound, noncentrality, squared_error
from ..channel import LinkGeometry, PhasePair, achievable_rate, channel_gain, peak_gain
from ..estimator import default_steps, two_stage_estimate
from ..signal import PilotSampler, RngStream, dbm_to_watts, sample_nlos_perturbation
from .baselines import grid_search_baseline, max_grid_size, oracle_baseline
from .config import ExperimentConfig

CONFIDENCE = 0.99
RANDOM_USER_RADIUS = 0.9

_USER, _NLOS, _CENTER, _TWO_STAGE, _GRID = 1, 2, 3, 4, 5

ERROR_COLUMNS = (
    "distance_m", "pilot_dbm", "total_pilots", "per_epoch_n", "pilots_used",
    "epsilon", "trials", "failures", "error_probability", "wilson_low",
    "wilson_high", "bound", "bound_raw", "degenerate_trials",
)
RATE_COLUMNS = (
    "distance_m", "total_pilots", "pilot_dbm", "method", "trials", "mean_rate",
    "ci_low", "ci_high", "pilots_used",
)


@dataclass(frozen=True)
class MethodOutcome:
    beta_hat: PhasePair
    squared_error: float
    rate: float
    pilots_used: int


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    alpha: PhasePair
    nlos_magnitude: float
    outcomes: dict[str, MethodOutcome]
    stream_ids: tuple[int, ...]
    probe_lambdas: tuple[float, ...] | None = None
    per_epoch_n: int | None = None
    degenerate: bool = False
    center: PhasePair | None = field(default=None)


def draw_user(cfg: ExperimentConfig, rng: RngStream, distance: float) -> LinkGeometry:
    if not cfg.random_user:
        return LinkGeometry(distance, cfg.alpha[0], cfg.alpha[1], cfg.radiation_factor)
    u_r, u_phi = rng.generator.random(2)
    r = RANDOM_USER_RADIUS * math.sqrt(u_r)
    phi = 2.0 * math.pi * u_phi
    return LinkGeometry(distance, r * math.cos(phi), r * math.sin(phi), cfg.radiation_factor)


def _probe_center(cfg: ExperimentConfig, link: LinkGeometry, rng: RngStream,
                  kx: float) -> PhasePair | None:
    if cfg.center_mode == "stage0":
        return None
    if cfg.center_mode == "fixed":
        return PhasePair(*cfg.center)
    radius = cfg.center_radius if cfg.center_radius is not None else 0.5 / kx
    dx, dy = rng.generator.uniform(-radius, radius, 2)
    return PhasePair.clamped(link.alpha1 + dx, link.alpha2 + dy)


def run_trial(cfg: ExperimentConfig, trial: int, distance: float, pilot_dbm: float,
              total_pilots: int, methods=None) -> TrialRecord:
    """One user, one NLoS realisation, every requested method."""
    methods = cfg.methods if methods is None else methods
    geom = cfg.geometry()
    noise = cfg.noise()
    sigma2 = noise.sigma2
    pilot_power = dbm_to_watts(pilot_dbm)
    data_power = dbm_to_watts(cfg.data_dbm)

    root = RngStream(cfg.seed, trial)
    link = draw_user(cfg, root.child(_USER), distance)
    h_nlos = sample_nlos_perturbation(root.child(_NLOS), noise, peak_gain(geom, link) ** 2)

    def outcome(beta: PhasePair, pilots_used: int) -> MethodOutcome:
        h = channel_gain(geom, link, beta)
        return MethodOutcome(beta, squared_error(beta, link.alpha),
                             achievable_rate(data_power, h, sigma2), pilots_used)

    outcomes: dict[str, MethodOutcome] = {}
    lambdas = None
    per_epoch_n = None
    degenerate = False
    center = None
    if "two_stage" in methods:
        v, w = default_steps(geom)
        v = cfg.step_v if cfg.step_v is not None else v
        w = cfg.step_w if cfg.step_w is not None else w
        sampler = PilotSampler(geom, link, pilot_power, sigma2, root.child(_TWO_STAGE), h_nlos)
        result = two_stage_estimate(geom, sampler, total_pilots, sigma2, v, w,
                                    center=_probe_center(cfg, link, root.child(_CENTER), geom.kx))
        outcomes["two_stage"] = outcome(result.beta_hat, result.pilots_used)
        lambdas = tuple(noncentrality(pilot_power, channel_gain(geom, link, p), sigma2)
                        for p in result.probe_set.probes)
        per_epoch_n = result.mean_estimates.per_epoch_n
        degenerate = result.degenerate
        center = result.probe_set.center
    if "oracle" in methods:
        outcomes["oracle"] = outcome(oracle_baseline(link), 0)
    if "grid_search" in methods:
        size = cfg.grid_size if cfg.grid_size is not None else max_grid_size(total_pilots)
        sampler = PilotSampler(geom, link, pilot_power, sigma2, root.child(_GRID), h_nlos)
        outcomes["grid_search"] = outcome(grid_search_baseline(sampler, total_pilots, size),
                                          size * size)
    return TrialRecord(trial=trial, alpha=link.alpha, nlos_magnitude=abs(h_nlos),
                       outcomes=outcomes, stream_ids=(cfg.seed, trial),
                       probe_lambdas=lambdas, per_epoch_n=per_epoch_n,
                       degenerate=degenerate, center=center)


def run_point(cfg: ExperimentConfig, distance: float, pilot_dbm: float,
              total_pilots: int, methods=None) -> list[TrialRecord]:
    """All ``cfg.trials`` trials of one sweep point, in trial order."""
    def work(t):
        return run_trial(cfg, t, distance, pilot_dbm, total_pilots, methods)

    if cfg.workers == 1:
        return [work(t) for t in range(cfg.trials)]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(work, range(cfg.trials)))


def wilson_interval(failures: int, trials: int, confidence: float = CONFIDENCE):
    low, high = proportion_confint(failures, trials, alpha=1.0 - confidence, method="wilson")
    return float(low), float(high)


def mean_interval(values, confidence: float = CONFIDENCE):
    """Normal-approximation interval for the mean of ``values``."""
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, mean, mean
    half = norm.ppf(0.5 + confidence / 2.0) * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    return mean, mean - half, mean + half


def summarize_errors(records: list[TrialRecord], epsilon: float) -> dict:
    """Error-probability statistics and the mean bound for one epsilon."""
    errors = np.array([r.outcomes["two_stage"].squared_error for r in records])
    failures = int(np.count_nonzero(errors >= epsilon))
    low, high = wilson_interval(failures, len(records))
    bounds = []
    raws = []
    for r in records:
        params = BoundParams(r.probe_lambdas[1:], r.per_epoch_n, epsilon,
                             center_lambda=r.probe_lambdas[0])
        bounds.append(error_probability_bound(params))
        raws.append(error_probability_bound(params, clip=False))
    return {
        "epsilon": epsilon,
        "trials": len(records),
        "failures": failures,
        "error_probability": failures / len(records),
        "wilson_low": low,
        "wilson_high": high,
        # the bound holds conditionally on the centre, so its mean bounds the
        # unconditional probability
        "bound": float(np.mean(bounds)),
        "bound_raw": float(np.mean(raws)),
        "degenerate_trials": sum(r.degenerate for r in records),
    }


def run_error_probability_sweep(cfg: ExperimentConfig) -> list[dict]:
    """One row per (distance, pilot power, N, epsilon) with the two-stage method."""
    rows = []
    for distance in cfg.distances:
        for pilot_dbm in cfg.pilot_dbm:
            for total in cfg.pilots:
                records = run_point(cfg, distance, pilot_dbm, total, methods=("two_stage",))
                head = {
                    "distance_m": distance,
                    "pilot_dbm": pilot_dbm,
                    "total_pilots": total,
                    "per_epoch_n": records[0].per_epoch_n,
                    "pilots_used": records[0].outcomes["two_stage"].pilots_used,
                }
                for eps in cfg.epsilons:
                    rows.append({**head, **summarize_errors(records, eps)})
    return rows


def run_rate_sweep(cfg: ExperimentConfig) -> list[dict]:
    """Mean achievable rate per method, pilot power, pilot budget and distance."""
    rows = []
    for distance in cfg.distances:
        for total in cfg.pilots:
            for pilot_dbm in cfg.pilot_dbm:
                records = run_point(cfg, distance, pilot_dbm, total)
                for method in cfg.methods:
                    rates = [r.outcomes[method].rate for r in records]
                    mean, low, high = mean_interval(rates)
                    rows.append({
                        "distance_m": distance,
                        "total_pilots": total,
                        "pilot_dbm": pilot_dbm,
                        "method": method,
                        "trials": len(records),
                        "mean_rate": mean,
                        "ci_low": low,
                        "ci_high": high,
                        "pilots_used": records[0].outcomes[method].pilots_used,
                    })
    return rows


PRESETS = {
    # rate vs pilot power, 23-pilot budget (3 centre + 4 per epoch)
    "rate-vs-power": dict(distances=[200.0, 10.0], pilots=[23], pilot_dbm=[0.0, 10.0, 20.0, 30.0],
                 center_mode="stage0", methods=["two_stage", "oracle", "grid_search"]),
    # error probability vs N, three radii, AWGN only
    "error-vs-pilots": dict(distances=[200.0], pilot_dbm=[10.0], pilots=[100, 1000, 10000],
                 epsilons=[0.01, 0.05, 0.1], center_mode="perturbed", nlos_paths=0,
                 methods=["two_stage"]),
    # error probability vs pilot power at epsilon = 0.05
    "error-vs-power": dict(distances=[200.0], pilot_dbm=[5.0, 10.0, 20.0], pilots=[100, 1000],
                 epsilons=[0.05], center_mode="perturbed", nlos_paths=0,
                 methods=["two_stage"]),
}


def preset_config(name: str, **overrides) -> ExperimentConfig:
    return ExperimentConfig(**{**PRESETS[name], **overrides})


def rate_vs_power_config(**overrides) -> ExperimentConfig:
    return preset_config("rate-vs-power", **overrides)


def error_vs_pilots_config(**overrides) -> ExperimentConfig:
    return preset_config("error-vs-pilots", **overrides)


def error_vs_power_config(**overrides) -> ExperimentConfig:
    return preset_config("error-vs-power", **overrides)
