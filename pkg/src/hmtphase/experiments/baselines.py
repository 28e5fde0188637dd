"""Reference beam-selection schemes compared against the two-stage estimator."""
from __future__ import annotations

import math

import numpy as np

from ..channel import LinkGeometry, PhasePair
from ..estimator import Sampler


def oracle_baseline(link: LinkGeometry) -> PhasePair:
    """Perfect knowledge of the user direction; uses no pilots."""
    return PhasePair(link.alpha1, link.alpha2)


def max_grid_size(total_pilots: int) -> int:
    return math.isqrt(total_pilots)


def grid_points(grid_size: int) -> list[PhasePair]:
    """Row-major uniform grid over [-1, 1]^2 (beta1 outer, beta2 inner)."""
    axis = np.linspace(-1.0, 1.0, grid_size)
    return [PhasePair(float(b1), float(b2)) for b1 in axis for b2 in axis]


def grid_search_baseline(sampler: Sampler, total_pilots: int, grid_size: int) -> PhasePair:
    """Exhaustive single-pilot sweep of a grid_size x grid_size beam grid.

    Returns the point with the largest received power; ties resolve to the
    lexicographically smallest (beta1, beta2), i.e. first in row-major order.
    """
    if grid_size < 1:
        raise ValueError("grid_size must be >= 1")
    if grid_size * grid_size > total_pilots:
        raise ValueError(f"{grid_size}x{grid_size} grid needs {grid_size ** 2} pilots, "
                         f"budget is {total_pilots}")
    points = grid_points(grid_size)
    powers = [float(sampler(p, 1, k)[0]) for k, p in enumerate(points)]
    return points[int(np.argmax(powers))]
