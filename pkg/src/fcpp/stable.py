"""Building-block samplers: one-sided stable, unit Frechet and mean-one Pareto."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["StableParams", "stable_sample", "frechet_sample", "pareto_mean1_sample"]


@dataclass(frozen=True)
class StableParams:
    """Stability index of the one-sided law ``D_alpha``, E exp(-s D) = exp(-s**alpha)."""

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")


def _open_uniform(rng, n):
    # (0, 1]: keeps logs and negative powers finite
    return 1.0 - rng.random(n)


def _stable_unit(alpha, n, rng):
    # Chambers-Mallows-Stuck for S_alpha(1, 1, 0), totally skewed, alpha < 1.
    # With V uniform on (-pi/2, pi/2) the skewness offset is B = pi/2, and the
    # factor cos(pi alpha / 2)**(1/alpha) rescaling S_alpha(1,1,0) to Laplace
    # transform exp(-s**alpha) cancels the CMS prefactor exactly; what remains
    # is written in U = V + pi/2 in (0, pi).
    u = np.pi * _open_uniform(rng, n)
    w = rng.standard_exponential(n)
    a = np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha)
    b = (np.sin((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha)
    return a * b


def stable_sample(p: StableParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n variates of ``D_alpha``; every draw is strictly positive."""
    if n < 1:
        raise DomainError("n must be at least 1")
    return _stable_unit(p.alpha, n, rng)


def frechet_sample(n: int, rng: np.random.Generator) -> np.ndarray:
    """Unit Frechet variates, ``P(Y <= x) = exp(-1/x)``, via ``-1/log(U)``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    u = rng.random(n)
    # u == 0 maps to +0.0, which has probability exp(-inf) = 0 anyway
    with np.errstate(divide="ignore"):
        return -1.0 / np.log(u)


def frechet_from_uniform(u):
    """Inverse transform used by :func:`frechet_sample`."""
    return -1.0 / np.log(u)


def pareto_scale_mean1(alpha: float) -> float:
    """Scale ``x_m`` with ``alpha * x_m / (alpha - 1) == 1``."""
    if not alpha > 1.0:
        raise DomainError(f"Pareto index must exceed 1 for a finite mean, got {alpha!r}")
    return (alpha - 1.0) / alpha


def pareto_mean1_sample(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Pareto(alpha) variates rescaled to mean one."""
    xm = pareto_scale_mean1(alpha)
    if n < 1:
        raise DomainError("n must be at least 1")
    return xm * _open_uniform(rng, n) ** (-1.0 / alpha)
