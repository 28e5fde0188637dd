"""Five-probe closed-form inversion and the noisy two-stage estimator.

With exact mean powers at the five probes of a :class:`ProbeSet`, each axis
reduces to two quadratic-free equations in the unknown direction cosine, each
with two roots. The true value is a root of both, so the closest pair of roots
(one from each side) pins it down. The noisy algorithm plugs empirical means
into the same formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channel import HmtGeometry, PhasePair

# (phase, n, key) -> n received powers
Sampler = Callable[[PhasePair, int, int], np.ndarray]

DEFAULT_CENTER_CANDIDATES = (
    PhasePair(-2.0 / 3.0, -2.0 / 3.0),
    PhasePair(0.0, 0.0),
    PhasePair(2.0 / 3.0, 2.0 / 3.0),
)
CENTER_PILOTS = 3

# sampler keys: epochs use 0..4, the centre search uses the block below
_CENTER_KEY_BASE = 16
_STEP_TOL = 1e-9
NOISELESS_FLOOR = 1e-300


class DegenerateMeansError(ValueError):
    """No finite candidate pair could be formed from the supplied means."""


@dataclass(frozen=True)
class ProbeSet:
    center: PhasePair
    step_v: float
    step_w: float
    probes: tuple[PhasePair, PhasePair, PhasePair, PhasePair, PhasePair]


@dataclass(frozen=True)
class MeanEstimates:
    mu_hat: tuple[float, float, float, float, float]
    per_epoch_n: int

    def __post_init__(self):
        if len(self.mu_hat) != 5:
            raise ValueError("need exactly five means")
        if any(m < 0 for m in self.mu_hat):
            raise ValueError("mean powers must be non-negative")
        if self.per_epoch_n < 1:
            raise ValueError("per_epoch_n must be >= 1")


@dataclass(frozen=True)
class AxisInversion:
    candidates: tuple[float, float, float, float]
    chosen_pair: tuple[int, int]
    estimate: float
    degenerate: bool = False

    def intersection_gap(self) -> float:
        """Distance between the chosen roots; ~0 when the means are exact."""
        i, j = self.chosen_pair
        return abs(self.candidates[i - 1] - self.candidates[j - 1])


@dataclass(frozen=True)
class EstimationResult:
    beta1_hat: float
    beta2_hat: float
    axis1: AxisInversion
    axis2: AxisInversion
    probe_set: ProbeSet
    mean_estimates: MeanEstimates
    pilots_used: int
    degenerate: bool = False
    center_powers: tuple[float, ...] = field(default=())

    @property
    def beta_hat(self) -> PhasePair:
        return PhasePair(self.beta1_hat, self.beta2_hat)


def _check_step(k: float, step: float, name: str) -> None:
    if not step > 0:
        raise ValueError(f"{name} must be positive")
    if step >= 2:
        raise ValueError(f"{name}={step} leaves no probe inside [-1, 1]")
    multiple = k * step
    if abs(multiple - round(multiple)) > _STEP_TOL or round(multiple) < 1:
        raise ValueError(f"K*{name} = {multiple:.6g} is not a positive integer")


def default_steps(geom: HmtGeometry) -> tuple[float, float]:
    """Smallest valid steps: one null spacing per axis."""
    return 1.0 / geom.kx, 1.0 / geom.ky


def build_probe_set(center: PhasePair, v: float, w: float, geom: HmtGeometry) -> ProbeSet:
    """The five probes: centre, +-v on axis 1, +-w on axis 2, clamped to [-1, 1]."""
    _check_step(geom.kx, v, "v")
    _check_step(geom.ky, w, "w")
    b1, b2 = center.beta1, center.beta2
    probes = (
        PhasePair(b1, b2),
        PhasePair.clamped(b1 + v, b2),
        PhasePair.clamped(b1 - v, b2),
        PhasePair.clamped(b1, b2 + w),
        PhasePair.clamped(b1, b2 - w),
    )
    return ProbeSet(center=center, step_v=v, step_w=w, probes=probes)


def estimate_means(probe_set: ProbeSet, per_epoch_n: int, sampler: Sampler) -> MeanEstimates:
    """Uniform exploration: ``per_epoch_n`` pilots at each probe, averaged.

    Epoch k draws from sampler key k, so the epochs are independent and the
    result does not depend on the order they run in.
    """
    if per_epoch_n < 1:
        raise ValueError("per_epoch_n must be >= 1")
    means = tuple(float(np.mean(sampler(probe, per_epoch_n, k)))
                  for k, probe in enumerate(probe_set.probes))
    return MeanEstimates(mu_hat=means, per_epoch_n=per_epoch_n)


def denominator_floor(sigma2: float) -> float:
    return max(1e-3 * sigma2, 1e-300)


def _ratio(num: float, den: float) -> float:
    if den > 0:
        return num / den
    # probe on an exact null: the roots collapse onto beta0 as the ratio grows
    return math.inf if num > 0 else math.nan


def invert_axis(mu_center: float, mu_plus: float, mu_minus: float,
                beta0: float, step: float, sigma2: float,
                floor: float | None = None) -> AxisInversion:
    """Recover one direction cosine from three mean powers along that axis.

    ``mu_plus``/``mu_minus`` are the means at ``beta0 +- step``. Excess powers
    ``|mu - sigma2|`` below ``floor`` (default ``denominator_floor(sigma2)``)
    are floored before division and the result is flagged degenerate.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    if sigma2 < 0:
        raise ValueError("sigma2 must be >= 0")
    if min(mu_center, mu_plus, mu_minus) < 0:
        raise ValueError("mean powers must be non-negative")

    if floor is None:
        floor = denominator_floor(sigma2)
    excess_c = abs(mu_center - sigma2)
    excess_p = abs(mu_plus - sigma2)
    excess_m = abs(mu_minus - sigma2)
    degenerate = min(excess_c, excess_p, excess_m) < floor

    root_p = math.sqrt(_ratio(excess_c, max(excess_p, floor)))
    root_m = math.sqrt(_ratio(excess_c, max(excess_m, floor)))

    def _div(den: float) -> float:
        return step / den if den != 0 else math.inf

    cands = (
        beta0 + _div(1.0 + root_p),
        beta0 + _div(1.0 - root_p),
        beta0 - _div(1.0 + root_m),
        beta0 - _div(1.0 - root_m),
    )

    best = None
    best_gap = math.inf
    for i in (1, 2):
        for j in (3, 4):
            a, b = cands[i - 1], cands[j - 1]
            if not (math.isfinite(a) and math.isfinite(b)):
                continue
            gap = abs(a - b)
            if gap < best_gap:
                best, best_gap = (i, j), gap
    if best is None:
        raise DegenerateMeansError("no finite candidate pair")
    i, j = best
    estimate = 0.5 * (cands[i - 1] + cands[j - 1])
    return AxisInversion(candidates=cands, chosen_pair=best, estimate=estimate,
                         degenerate=degenerate)


def _invert_both(means: MeanEstimates, probe_set: ProbeSet, sigma2: float,
                 floor: float | None = None) -> tuple[AxisInversion, AxisInversion]:
    mu = means.mu_hat
    c = probe_set.center
    axis1 = invert_axis(mu[0], mu[1], mu[2], c.beta1, probe_set.step_v, sigma2, floor)
    axis2 = invert_axis(mu[0], mu[3], mu[4], c.beta2, probe_set.step_w, sigma2, floor)
    return axis1, axis2


def solve_noiseless(means: MeanEstimates, probe_set: ProbeSet, sigma2: float) -> PhasePair:
    """Optimal (beta1, beta2) from exact mean powers at the five probes.

    Exact means carry no noise, so only a vanishing floor guards the division;
    far sidelobes can sit orders of magnitude below sigma2 and still invert.
    """
    axis1, axis2 = _invert_both(means, probe_set, sigma2, floor=NOISELESS_FLOOR)
    return PhasePair.clamped(axis1.estimate, axis2.estimate)


def select_initial_center(sampler: Sampler, pilots_available: int = CENTER_PILOTS,
                          candidates: Sequence[PhasePair] = DEFAULT_CENTER_CANDIDATES,
                          ) -> tuple[PhasePair, tuple[float, ...]]:
    """One pilot per candidate; return the strongest and all measured powers.

    Ties go to the lowest candidate index.
    """
    if pilots_available < len(candidates):
        raise ValueError(f"need {len(candidates)} pilots, have {pilots_available}")
    powers = tuple(float(sampler(c, 1, _CENTER_KEY_BASE + i)[0])
                   for i, c in enumerate(candidates))
    return candidates[int(np.argmax(powers))], powers


def two_stage_estimate(geom: HmtGeometry, sampler: Sampler, total_pilots: int,
                       sigma2: float, v: float | None = None, w: float | None = None,
                       center: PhasePair | None = None,
                       center_candidates: Sequence[PhasePair] = DEFAULT_CENTER_CANDIDATES,
                       ) -> EstimationResult:
    """Two-stage phase-shift estimation from ``total_pilots`` noisy pilots.

    If ``center`` is None, the probe centre is chosen first by spending one
    pilot on each of ``center_candidates``; the rest are split evenly over the
    five probes with the remainder discarded. ``sigma2`` is the AWGN power,
    assumed known.
    """
    if total_pilots < 5:
        raise ValueError(f"need at least 5 pilots, got {total_pilots}")
    dv, dw = default_steps(geom)
    v = dv if v is None else v
    w = dw if w is None else w

    center_powers: tuple[float, ...] = ()
    budget = total_pilots
    if center is None:
        center, center_powers = select_initial_center(sampler, budget, center_candidates)
        budget -= len(center_candidates)
    n = budget // 5
    if n < 1:
        raise ValueError(f"{total_pilots} pilots leave none for the five probe epochs")

    probe_set = build_probe_set(center, v, w, geom)
    means = estimate_means(probe_set, n, sampler)
    axis1, axis2 = _invert_both(means, probe_set, sigma2)
    b1 = min(1.0, max(-1.0, axis1.estimate))
    b2 = min(1.0, max(-1.0, axis2.estimate))
    return EstimationResult(
        beta1_hat=b1, beta2_hat=b2, axis1=axis1, axis2=axis2,
        probe_set=probe_set, mean_estimates=means,
        pilots_used=len(center_powers) + 5 * n,
        degenerate=axis1.degenerate or axis2.degenerate,
        center_powers=center_powers,
    )
