"""Far-field channel model of a holographic metasurface transceiver.

The HMT-user channel factorises into a product of two sinc patterns, one per
surface axis, scaled by the free-space path term. Everything here is a pure
function of immutable inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# below this |x| the series 1 - x^2/6 is exact to double precision
SINC_SERIES_THRESHOLD = 1e-8
_TWO_PI = 2.0 * math.pi


def sinc(x):
    """Unnormalised sinc, sin(x)/x, with sinc(0) = 1.

    Accepts scalars or arrays; scalars come back as Python floats.
    """
    arr = np.asarray(x, dtype=float)
    small = np.abs(arr) < SINC_SERIES_THRESHOLD
    safe = np.where(small, 1.0, arr)
    out = np.where(small, 1.0 - arr * arr / 6.0, np.sin(safe) / safe)
    if out.ndim == 0:
        return float(out)
    return out


def _is_integral(value: float, rel_tol: float = 1e-9) -> bool:
    return abs(value - round(value)) <= rel_tol * max(1.0, abs(value))


@dataclass(frozen=True)
class HmtGeometry:
    """Rectangular HMT aperture. Lengths in metres."""

    width: float
    length: float
    spacing: float
    wavelength: float

    def __post_init__(self):
        for name in ("width", "length", "spacing", "wavelength"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not _is_integral(self.width / self.spacing):
            raise ValueError("width / spacing must be an integer element count")
        if not _is_integral(self.length / self.spacing):
            raise ValueError("length / spacing must be an integer element count")

    @classmethod
    def baseline(cls) -> HmtGeometry:
        """30 GHz carrier, 1 m x 1 m surface, quarter-wavelength spacing."""
        wavelength = 0.01
        return cls(width=1.0, length=1.0, spacing=wavelength / 4, wavelength=wavelength)

    @property
    def kx(self) -> float:
        return self.width / self.wavelength

    @property
    def ky(self) -> float:
        return self.length / self.wavelength

    @property
    def mx(self) -> int:
        return int(round(self.width / self.spacing))

    @property
    def my(self) -> int:
        return int(round(self.length / self.spacing))

    @property
    def wave_number(self) -> float:
        return _TWO_PI / self.wavelength


@dataclass(frozen=True)
class LinkGeometry:
    """User position seen from the HMT centre.

    alpha1, alpha2 are the direction cosines sin(theta)cos(phi) and
    sin(theta)sin(phi); ``radiation_factor`` is the per-element pattern F.
    """

    distance: float
    alpha1: float
    alpha2: float
    radiation_factor: float = 1.0

    def __post_init__(self):
        if not self.distance > 0:
            raise ValueError(f"distance must be positive, got {self.distance!r}")
        for name in ("alpha1", "alpha2"):
            value = getattr(self, name)
            if not -1.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [-1, 1], got {value!r}")
        if not self.radiation_factor > 0:
            raise ValueError("radiation_factor must be positive")

    @classmethod
    def from_angles(cls, distance: float, theta: float, phi: float,
                    radiation_factor: float = 1.0) -> LinkGeometry:
        """Build from elevation ``theta`` and azimuth ``phi`` in radians."""
        alpha1 = float(np.clip(math.sin(theta) * math.cos(phi), -1.0, 1.0))
        alpha2 = float(np.clip(math.sin(theta) * math.sin(phi), -1.0, 1.0))
        return cls(distance, alpha1, alpha2, radiation_factor)

    @property
    def alpha(self) -> PhasePair:
        return PhasePair(self.alpha1, self.alpha2)


@dataclass(frozen=True)
class PhasePair:
    """The two phase-shift parameters (beta1, beta2) steering the surface."""

    beta1: float
    beta2: float

    def __post_init__(self):
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not -1.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [-1, 1], got {value!r}")

    @classmethod
    def clamped(cls, beta1: float, beta2: float) -> PhasePair:
        return cls(min(1.0, max(-1.0, float(beta1))), min(1.0, max(-1.0, float(beta2))))

    def __iter__(self):
        yield self.beta1
        yield self.beta2


def path_factor(geom: HmtGeometry, link: LinkGeometry) -> complex:
    """sqrt(F) lambda exp(-j k0 d0) / (4 pi d0) * Lx * Ly."""
    amplitude = (math.sqrt(link.radiation_factor) * geom.wavelength
                 / (4.0 * math.pi * link.distance) * geom.width * geom.length)
    # reduce the phase first: k0 d0 is ~1e5 rad at 200 m
    phase = math.fmod(geom.wave_number * link.distance, _TWO_PI)
    return amplitude * complex(math.cos(phase), -math.sin(phase))


def peak_gain(geom: HmtGeometry, link: LinkGeometry) -> float:
    """|H| at beta = alpha, the global maximum of the pattern."""
    return abs(path_factor(geom, link))


def gain_pattern(geom: HmtGeometry, link: LinkGeometry, beta1, beta2):
    """Real sinc-product factor of H; broadcasts over array-valued betas."""
    return (sinc(geom.kx * math.pi * (link.alpha1 - np.asarray(beta1, dtype=float)))
            * sinc(geom.ky * math.pi * (link.alpha2 - np.asarray(beta2, dtype=float))))


def channel_gain(geom: HmtGeometry, link: LinkGeometry, phase: PhasePair) -> complex:
    """Far-field HMT-user channel coefficient H(beta1, beta2)."""
    return path_factor(geom, link) * float(gain_pattern(geom, link, phase.beta1, phase.beta2))


def element_index_range(count: int) -> tuple[int, int]:
    """Inclusive (low, high) element index range along one axis.

    Odd counts are centred on zero; even counts run -M/2 .. M/2 - 1.
    """
    if count % 2:
        half = (count - 1) // 2
        return -half, half
    return -count // 2, count // 2 - 1


def element_phase_shift(geom: HmtGeometry, phase: PhasePair, m_x: int, m_y: int) -> float:
    """Phase (radians, in (-2pi, 0]) applied at element (m_x, m_y)."""
    for idx, count, name in ((m_x, geom.mx, "m_x"), (m_y, geom.my, "m_y")):
        low, high = element_index_range(count)
        if not low <= idx <= high:
            raise IndexError(f"{name}={idx} outside [{low}, {high}]")
    arg = geom.wave_number * geom.spacing * (m_x * phase.beta1 + m_y * phase.beta2)
    rem = math.fmod(arg, _TWO_PI)
    if rem < 0:
        rem += _TWO_PI
    # snap rounding residue of an exact multiple of 2pi back to 0
    if rem < 1e-12 * max(1.0, abs(arg)) or _TWO_PI - rem < 1e-12 * max(1.0, abs(arg)):
        return 0.0
    return -rem


def achievable_rate(p_tx: float, h: complex, sigma2: float) -> float:
    """Spectral efficiency log2(1 + P|H|^2 / sigma^2) in bits per channel use."""
    if not p_tx > 0 or not sigma2 > 0:
        raise ValueError("p_tx and sigma2 must be positive")
    return math.log1p(p_tx * abs(h) ** 2 / sigma2) / math.log(2.0)
