"""Pilot reception: AWGN, NLoS scatter, received power and seeded streams."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import HmtGeometry, LinkGeometry, PhasePair, channel_gain


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_watts: float) -> float:
    return 10.0 * math.log10(p_watts) + 30.0


@dataclass(frozen=True)
class NoiseModel:
    """AWGN power (W) plus the NLoS scatter model used in simulation."""

    sigma2: float
    nlos_path_count: int = 4
    nlos_power_offset_db: float = -20.0

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2!r}")
        if self.nlos_path_count < 0:
            raise ValueError("nlos_path_count must be >= 0")
        if self.nlos_power_offset_db > 0:
            raise ValueError("nlos_power_offset_db must be <= 0")


@dataclass(frozen=True)
class PilotConfig:
    """Pilot symbol power (W) and total pilot budget N."""

    power: float
    total: int

    def __post_init__(self):
        if not self.power > 0:
            raise ValueError(f"pilot power must be positive, got {self.power!r}")
        if self.total < 5:
            raise ValueError(f"need at least 5 pilots, got {self.total}")

    @property
    def per_epoch(self) -> int:
        return self.total // 5


class RngStream:
    """A reproducible random stream keyed by ``(seed, stream_id, *subkeys)``.

    Streams with different keys are statistically independent (numpy
    ``SeedSequence`` spawn keys). A stream is single-owner mutable state:
    do not share one instance between concurrent trials.
    """

    def __init__(self, seed: int, stream_id: int = 0, *subkeys: int):
        self.seed = int(seed)
        self.key = (int(stream_id),) + tuple(int(k) for k in subkeys)
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        self.generator = np.random.Generator(np.random.PCG64(seq))

    @property
    def stream_id(self) -> int:
        return self.key[0]

    def child(self, *subkeys: int) -> RngStream:
        """Independent stream derived from this one's key; does not advance it."""
        return RngStream(self.seed, *self.key, *subkeys)

    def complex_normal(self, variance: float, size=None):
        """Circularly symmetric CN(0, variance) draws."""
        scale = math.sqrt(variance / 2.0)
        if size is None:
            re, im = self.generator.standard_normal(2)
            return complex(scale * re, scale * im)
        shape = (size,) if np.isscalar(size) else tuple(size)
        z = self.generator.standard_normal((*shape, 2))
        return scale * (z[..., 0] + 1j * z[..., 1])

    def __repr__(self):
        return f"RngStream(seed={self.seed}, key={self.key})"


def sample_awgn(rng: RngStream, sigma2: float, size=None):
    """Complex AWGN with total power ``sigma2`` (sigma2/2 per component)."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    return rng.complex_normal(sigma2, size)


def sample_nlos_perturbation(rng: RngStream, model: NoiseModel, los_power: float) -> complex:
    """Sum of ``model.nlos_path_count`` CN(0, sigma_s^2) path coefficients.

    sigma_s^2 sits ``nlos_power_offset_db`` below ``los_power`` (a |H|^2 value).
    """
    if los_power < 0:
        raise ValueError("los_power must be >= 0")
    if model.nlos_path_count == 0 or los_power == 0:
        return 0j
    path_var = los_power * 10.0 ** (model.nlos_power_offset_db / 10.0)
    return complex(np.sum(rng.complex_normal(path_var, model.nlos_path_count)))


def received_pilot(h_eff: complex, power: float, rng: RngStream, sigma2: float, size=None):
    """y = sqrt(P) H_eff + noise, one draw or ``size`` i.i.d. draws."""
    if not power > 0:
        raise ValueError("pilot power must be positive")
    return math.sqrt(power) * h_eff + sample_awgn(rng, sigma2, size)


def received_power(y):
    """|y|^2, elementwise for arrays."""
    if isinstance(y, np.ndarray):
        return y.real ** 2 + y.imag ** 2
    return abs(y) ** 2


def expected_power(h: complex, power: float, sigma2: float) -> float:
    """Mean received power P|H|^2 + sigma^2."""
    if not power > 0 or not sigma2 > 0:
        raise ValueError("power and sigma2 must be positive")
    return power * abs(h) ** 2 + sigma2


class PilotSampler:
    """Draws received powers for a user seen through a fixed channel.

    Calling ``sampler(phase, n, key)`` returns ``n`` received powers with the
    surface steered to ``phase``. Each ``key`` maps to its own child stream of
    ``rng``, so results do not depend on the order in which keys are queried.
    ``h_nlos`` is a fixed scatter term added to the LoS gain (block fading).
    """

    def __init__(self, geom: HmtGeometry, link: LinkGeometry, power: float,
                 sigma2: float, rng: RngStream, h_nlos: complex = 0j):
        self.geom = geom
        self.link = link
        self.power = power
        self.sigma2 = sigma2
        self.rng = rng
        self.h_nlos = h_nlos

    def effective_gain(self, phase: PhasePair) -> complex:
        return channel_gain(self.geom, self.link, phase) + self.h_nlos

    def __call__(self, phase: PhasePair, n: int, key: int = 0) -> np.ndarray:
        y = received_pilot(self.effective_gain(phase), self.power,
                           self.rng.child(key), self.sigma2, size=n)
        return received_power(y)
