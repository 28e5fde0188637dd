"""|H(beta1, beta2)| sampled over the whole steering domain."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..channel import HmtGeometry, LinkGeometry, gain_pattern, peak_gain

SURFACE_COLUMNS = ("beta1", "beta2", "gain_abs")


@dataclass(frozen=True)
class GainSurface:
    beta1: np.ndarray  # (R,)
    beta2: np.ndarray  # (R,)
    gain_abs: np.ndarray  # (R, R), indexed [beta1, beta2]
    peak: float

    @property
    def step(self) -> float:
        return float(self.beta1[1] - self.beta1[0])

    @property
    def argmax(self) -> tuple[int, int]:
        i, j = np.unravel_index(int(np.argmax(self.gain_abs)), self.gain_abs.shape)
        return int(i), int(j)

    def argmax_point(self) -> tuple[float, float]:
        i, j = self.argmax
        return float(self.beta1[i]), float(self.beta2[j])

    def cell_contains(self, b1: float, b2: float) -> bool:
        """Whether (b1, b2) falls in the grid cell centred on the argmax."""
        c1, c2 = self.argmax_point()
        half = 0.5 * self.step
        return abs(b1 - c1) <= half + 1e-15 and abs(b2 - c2) <= half + 1e-15

    def rows(self):
        for i, b1 in enumerate(self.beta1):
            for j, b2 in enumerate(self.beta2):
                yield {"beta1": float(b1), "beta2": float(b2),
                       "gain_abs": float(self.gain_abs[i, j])}


def gain_surface(geom: HmtGeometry, link: LinkGeometry, beta1, beta2) -> np.ndarray:
    """|H| on the outer grid of the two beta axes."""
    b1 = np.asarray(beta1, dtype=float)[:, None]
    b2 = np.asarray(beta2, dtype=float)[None, :]
    return peak_gain(geom, link) * np.abs(gain_pattern(geom, link, b1, b2))


def render_gain_surface(geom: HmtGeometry, link: LinkGeometry, resolution: int) -> GainSurface:
    if resolution < 16:
        raise ValueError("resolution must be >= 16")
    axis = np.linspace(-1.0, 1.0, resolution)
    return GainSurface(beta1=axis, beta2=axis.copy(),
                       gain_abs=gain_surface(geom, link, axis, axis),
                       peak=peak_gain(geom, link))
