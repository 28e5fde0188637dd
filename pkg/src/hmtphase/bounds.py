"""Error-probability bound for the two-stage estimator and its tail toolkit."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .channel import PhasePair
from .signal import RngStream

_LOG4 = math.log(4.0)


@dataclass(frozen=True)
class BoundParams:
    """Non-centralities at the four off-centre probes, epoch size and radius.

    ``probe_lambdas`` holds (lambda_2, ..., lambda_5) in probe order
    (+v, -v, +w, -w). ``center_lambda`` is informational only; the bound
    does not depend on it.
    """

    probe_lambdas: tuple[float, float, float, float]
    per_epoch_n: int
    epsilon: float
    center_lambda: float | None = None

    def __post_init__(self):
        if len(self.probe_lambdas) != 4:
            raise ValueError("need the four off-centre non-centralities")
        if any(lam < 0 for lam in self.probe_lambdas):
            raise ValueError("non-centralities must be >= 0")
        if self.per_epoch_n < 1:
            raise ValueError("per_epoch_n must be >= 1")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon!r}")

    @classmethod
    def from_all(cls, lambdas: Sequence[float], per_epoch_n: int,
                 epsilon: float) -> BoundParams:
        """Accept either (l1..l5) or (l2..l5)."""
        lambdas = tuple(float(x) for x in lambdas)
        if len(lambdas) == 5:
            return cls(lambdas[1:], per_epoch_n, epsilon, center_lambda=lambdas[0])
        return cls(lambdas, per_epoch_n, epsilon)


@dataclass(frozen=True)
class SubExpParams:
    nu: float
    b: float
    mean: float = 0.0

    def __post_init__(self):
        if self.nu < 0 or not self.b > 0:
            raise ValueError("need nu >= 0 and b > 0")


def noncentrality(power: float, h: complex, sigma2: float) -> float:
    """2 P |H|^2 / sigma^2."""
    if not power > 0 or not sigma2 > 0:
        raise ValueError("power and sigma2 must be positive")
    return 2.0 * power * abs(h) ** 2 / sigma2


def log_error_probability_bound(params: BoundParams) -> float:
    """Natural log of the unclipped bound (may be positive)."""
    lam = np.asarray(params.probe_lambdas, dtype=float)
    rate = (params.epsilon * lam / (1.0 + lam)) ** 2
    return _LOG4 + float(logsumexp(-params.per_epoch_n / 32.0 * rate))


def error_probability_bound(params: BoundParams, clip: bool = True) -> float:
    """Upper bound on P{(b1_hat - a1)^2 + (b2_hat - a2)^2 >= epsilon}.

    The raw expression can exceed 1; ``clip`` caps it there.
    """
    log_bound = log_error_probability_bound(params)
    if clip:
        return 1.0 if log_bound >= 0 else math.exp(log_bound)
    return math.exp(log_bound)


def squared_error(beta_hat: PhasePair, alpha: PhasePair) -> float:
    return (beta_hat.beta1 - alpha.beta1) ** 2 + (beta_hat.beta2 - alpha.beta2) ** 2


def sample_noncentral_chi2(rng: RngStream, dof: int, lam: float, size=None):
    """Draws of chi^2_dof(lam) built as a sum of ``dof`` squared unit normals.

    The whole mean offset sqrt(lam) sits on the first coordinate; any split
    with the same squared norm gives the same law.
    """
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    count = 1 if size is None else int(size)
    z = rng.generator.standard_normal((count, dof))
    z[:, 0] += math.sqrt(lam)
    out = np.einsum("ij,ij->i", z, z)
    return float(out[0]) if size is None else out


def sub_exponential_tail(nu_star: float, b_star: float, n: int, t: float) -> float:
    """Two-regime tail bound on |mean of n centred sub-exponential terms| >= t.

    ``nu_star``, ``b_star`` are the aggregate parameters of the sum.
    """
    if t < 0 or n < 1:
        raise ValueError("need t >= 0 and n >= 1")
    SubExpParams(nu_star, b_star)
    if nu_star == 0:
        return 1.0 if t == 0 else 0.0
    if t <= nu_star ** 2 / (n * b_star):
        exponent = -n * t * t / (2.0 * nu_star ** 2 / n)
    else:
        exponent = -n * t / (2.0 * b_star)
    return min(1.0, 2.0 * math.exp(exponent))


def corollary_tail(a: float, n: int, t: float) -> float:
    """Tail bound for the centred mean of n i.i.d. chi^2_2(a) variables."""
    if not t > 0 or a < 0 or n < 1:
        raise ValueError("need t > 0, a >= 0, n >= 1")
    return min(1.0, 2.0 * math.exp(-n * t * t / (8.0 * (2.0 + 2.0 * a) ** 2)))


def log_centered_mgf(dof: float, a: float, t):
    """log E[exp(t (X - (dof + a)))] for X ~ chi^2_dof(a); valid for t < 1/2."""
    t = np.asarray(t, dtype=float)
    if np.any(t >= 0.5):
        raise ValueError("MGF only exists for t < 1/2")
    return 2.0 * a * t * t / (1.0 - 2.0 * t) - dof * t - 0.5 * dof * np.log1p(-2.0 * t)


def log_subexp_mgf_envelope(dof: float, a: float, t):
    """log of exp(2 (dof + 2a) t^2), the envelope claimed for |t| <= 1/4."""
    t = np.asarray(t, dtype=float)
    return 2.0 * (dof + 2.0 * a) * t * t
