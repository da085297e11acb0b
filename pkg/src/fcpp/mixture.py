"""Limit law of rescaled inter-exceedance times.

``P = (1 - theta) * delta_0 + theta * ML(beta, theta**(-1/beta) * sigma)``
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .mlf import MlParams, _ml_cdf_array, ml_sample

__all__ = ["FcppParams", "ModelFamily", "mixture_cdf", "mixture_sample", "rho_of"]


class ModelFamily(enum.Enum):
    """Which of beta, theta are free; pinned ones are exactly 1."""

    FCPP = "fcpp"
    FPP = "fpp"  # theta = 1
    CPP = "cpp"  # beta = 1
    PP = "pp"  # beta = theta = 1

    @property
    def beta_free(self) -> bool:
        return self in (ModelFamily.FCPP, ModelFamily.FPP)

    @property
    def theta_free(self) -> bool:
        return self in (ModelFamily.FCPP, ModelFamily.CPP)

    @classmethod
    def parse(cls, value) -> "ModelFamily":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown model family {value!r}") from None


@dataclass(frozen=True)
class FcppParams:
    beta: float
    theta: float
    sigma: float

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise DomainError(f"beta must lie in (0, 1], got {self.beta!r}")
        if not 0.0 < self.theta <= 1.0:
            raise DomainError(f"theta must lie in (0, 1], got {self.theta!r}")
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise DomainError(f"sigma must be positive and finite, got {self.sigma!r}")

    @property
    def component_scale(self) -> float:
        """Scale of the Mittag-Leffler component, ``theta**(-1/beta) * sigma``."""
        return self.theta ** (-1.0 / self.beta) * self.sigma

    @property
    def component(self) -> MlParams:
        return MlParams(self.beta, self.component_scale)

    def family(self) -> ModelFamily:
        if self.beta == 1.0 and self.theta == 1.0:
            return ModelFamily.PP
        if self.beta == 1.0:
            return ModelFamily.CPP
        if self.theta == 1.0:
            return ModelFamily.FPP
        return ModelFamily.FCPP


def _mixture_cdf_array(beta, theta, sigma, t):
    t = np.asarray(t, dtype=float)
    scale = theta ** (-1.0 / beta) * sigma
    out = (1.0 - theta) + theta * _ml_cdf_array(beta, scale, t)
    return np.where(t < 0, 0.0, out)


def mixture_cdf(p: FcppParams, t):
    """Right-continuous cdf: 0 below zero, ``1 - theta`` at zero."""
    out = _mixture_cdf_array(p.beta, p.theta, p.sigma, t)
    return float(out) if out.ndim == 0 else out


def mixture_sample(p: FcppParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draws that are 0 with probability ``1 - theta``, else from the ML component."""
    if n < 1:
        raise DomainError("n must be at least 1")
    keep = rng.random(n) < p.theta
    out = np.zeros(n)
    m = int(keep.sum())
    if m:
        out[keep] = ml_sample(p.component, m, rng)
    return out


def rho_of(p: FcppParams, p_u: float) -> float:
    """Normalised scale ``sigma * p_u**(1/beta)``."""
    if not 0.0 < p_u < 1.0:
        raise DomainError(f"exceedance probability must lie in (0, 1), got {p_u!r}")
    return p.sigma * p_u ** (1.0 / p.beta)
