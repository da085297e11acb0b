"""Mittag-Leffler function on the negative real axis and the Mittag-Leffler law.

``E_beta(z) = sum_n z**n / Gamma(beta*n + 1)`` is evaluated for ``z <= 0`` with
three tiers:

* Taylor series for ``|z| <= 1``;
* inversion of the Laplace transform ``s**(beta-gamma) / (s**beta + x)`` along a
  parabolic Bromwich contour (trapezoidal rule, 16 nodes) for moderate ``|z|``;
* the algebraic asymptotic expansion ``-sum_k z**(-k) / Gamma(1 - beta*k)`` for
  large ``|z|``.

Relative accuracy is about 1e-13 for beta up to 0.99 and degrades to
absolute accuracy ~1e-16 in the contour band as beta approaches 1, where
``E_beta(-x)`` itself becomes tiny there and the contour sum cancels.

``ML(beta, sigma)`` denotes the law of ``sigma * T`` where ``T`` has Laplace
transform ``1 / (1 + s**beta)``; its cdf is ``1 - E_beta(-(t/sigma)**beta)``.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from functools import lru_cache

import numpy as np
from scipy.special import rgamma

from .errors import DomainError

__all__ = ["MlParams", "mlf_e", "ml_cdf", "ml_pdf", "ml_quantile", "ml_sample"]

_SERIES_LIMIT = 1.0
_CONTOUR_NODES = 16
_ASYMPTOTIC_TERMS = 10
# relative size of the neglected asymptotic remainder at the switch point
_ASYMPTOTIC_RTOL = 1e-16


@dataclass(frozen=True)
class MlParams:
    """Parameters of ML(beta, sigma): tail parameter and scale."""

    beta: float
    sigma: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise DomainError(f"beta must lie in (0, 1], got {self.beta!r}")
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise DomainError(f"sigma must be positive and finite, got {self.sigma!r}")


def _check_beta(beta):
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")


# ---------------------------------------------------------------------------
# evaluation tiers; all take x = -z >= 0 as an ndarray


@lru_cache(maxsize=256)
def _series_coefficients(beta, gam, skip):
    """``1/Gamma(beta*n + gam)`` for n = skip, skip+1, ... until negligible."""
    # Gamma(20) > 1e17, so the terms are negligible once beta*n + gam > 21
    n = np.arange(skip, skip + int(np.ceil(21.0 / beta)) + 3)
    return rgamma(beta * n + gam)


def _series(beta, gam, x, skip=0):
    """``sum_{n >= skip} (-x)**(n - skip) / Gamma(beta*n + gam)``."""
    coef = _series_coefficients(beta, gam, skip)
    # x <= 1 here, so the power table cannot overflow
    powers = np.empty((x.size, coef.size))
    powers[:, 0] = 1.0
    powers[:, 1:] = -x[:, None]
    np.cumprod(powers, axis=1, out=powers)
    return powers @ coef


@lru_cache(maxsize=256)
def _contour_weights(beta, gam):
    # Parabola s(u) = mu (1 + iu)^2 with h = 3/N and mu = pi N / 12 at unit time;
    # conjugate symmetry lets us sum over u >= 0 only.
    n = _CONTOUR_NODES
    h = 3.0 / n
    mu = np.pi * n / 12.0
    u = np.arange(n + 1) * h
    s = mu * (1.0 + 1j * u) ** 2
    ds = 2j * mu * (1.0 + 1j * u)
    w = np.exp(s) * s ** (beta - gam) * ds * (h / np.pi) / 1j
    w[0] *= 0.5
    return w, s**beta


def _contour(beta, gam, x):
    w, sb = _contour_weights(beta, gam)
    return (w[None, :] / (sb[None, :] + x[:, None])).sum(axis=1).real


@lru_cache(maxsize=256)
def _asymptotic_coefficients(beta, gam):
    k = np.arange(1, _ASYMPTOTIC_TERMS + 4)
    return k, (-1.0) ** (k + 1) * rgamma(gam - beta * k)


def _asymptotic(beta, gam, x):
    k, c = _asymptotic_coefficients(beta, gam)
    inv = 1.0 / x
    acc = np.zeros_like(x)
    for ci in c[_ASYMPTOTIC_TERMS - 1 :: -1]:
        acc = (acc + ci) * inv
    return acc


@lru_cache(maxsize=256)
def _asymptotic_switch(beta, gam):
    """Smallest |z| from which the truncated expansion is trusted."""
    k, c = _asymptotic_coefficients(beta, gam)
    lead = int(np.flatnonzero(c)[0])
    k_lead = float(k[lead])
    log_lead = math.log(abs(c[lead]))
    log_rtol = math.log(_ASYMPTOTIC_RTOL)
    # first non-vanishing neglected term against the leading one
    nxt = _ASYMPTOTIC_TERMS + int(np.flatnonzero(c[_ASYMPTOTIC_TERMS:])[0])
    log_x = (math.log(abs(c[nxt])) - log_lead - log_rtol) / (k[nxt] - k_lead)
    # exponentially small remainder exp(cos(pi/beta) x**(1/beta)), beta near one
    cos_term = math.cos(math.pi / beta)
    if beta > 2.0 / 3.0 and cos_term < 0.0:
        x = 10.0
        for _ in range(30):
            x = ((k_lead * math.log(x) - log_lead - log_rtol) / -cos_term) ** beta
        log_x = max(log_x, math.log(x))
    # keep a floor so the contour owns the transition region
    return min(max(math.exp(log_x), 10.0), 1e8)


def _mlf_negative(beta, gam, x, complement=False):
    """``E_{beta,gam}(-x)`` for x >= 0; ``1 - E_beta(-x)`` if complement (gam=1)."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    lo = x <= _SERIES_LIMIT
    hi = x >= _asymptotic_switch(beta, gam)
    mid = ~(lo | hi)
    if lo.any():
        xl = x[lo]
        if complement:
            out[lo] = xl * _series(beta, gam, xl, skip=1)
        else:
            out[lo] = _series(beta, gam, xl)
    if mid.any():
        out[mid] = _contour(beta, gam, x[mid])
        if complement:
            out[mid] = 1.0 - out[mid]
    if hi.any():
        out[hi] = _asymptotic(beta, gam, x[hi])
        if complement:
            out[hi] = 1.0 - out[hi]
    # rounding of the contour sum can step just outside [0, 1] for beta near 1
    return np.clip(out, 0.0, 1.0) if gam == 1.0 else np.maximum(out, 0.0)


def mlf_e(beta, z):
    """One-parameter Mittag-Leffler function ``E_beta(z)`` for ``z <= 0``.

    Parameters
    ----------
    beta : float
        Index in (0, 1].
    z : float or array_like
        Non-positive argument(s).

    Returns
    -------
    float or ndarray
        ``E_beta(z)``, in (0, 1]. ``beta == 1`` returns ``exp(z)``.
    """
    _check_beta(beta)
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr > 0) or np.any(np.isnan(z_arr)):
        raise DomainError("mlf_e is only defined here for z <= 0")
    if beta == 1.0:
        out = np.exp(z_arr)
    else:
        out = _mlf_negative(float(beta), 1.0, -z_arr.ravel()).reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# the distribution


def _ml_cdf_array(beta, sigma, t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    if pos.any():
        with np.errstate(over="ignore"):
            u = t[pos] / sigma
        if beta == 1.0:
            out[pos] = -np.expm1(-u)
        else:
            out[pos] = _mlf_negative(beta, 1.0, u**beta, complement=True)
    out[np.isposinf(t)] = 1.0
    return out


def ml_cdf(p: MlParams, t):
    """Distribution function ``1 - E_beta(-(t/sigma)**beta)``, zero for t <= 0."""
    out = _ml_cdf_array(p.beta, p.sigma, t)
    return float(out) if out.ndim == 0 else out


def _ml_pdf_array(beta, sigma, t):
    u = np.asarray(t, dtype=float) / sigma
    if beta == 1.0:
        return np.exp(-u) / sigma
    # d/dt [1 - E_b(-u^b)] = u^(b-1) E_{b,b}(-u^b) / sigma
    return u ** (beta - 1.0) * _mlf_negative(beta, beta, u**beta) / sigma


def ml_pdf(p: MlParams, t):
    """Density of ML(beta, sigma) at t > 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)):
        raise DomainError("ml_pdf requires t > 0")
    out = _ml_pdf_array(p.beta, p.sigma, t_arr)
    return float(out) if out.ndim == 0 else out


def _quantile_scalar(beta, q):
    # unit scale; bracket by doubling, bisect, then polish with Newton
    lo, hi = 0.0, 1.0
    while _ml_cdf_array(beta, 1.0, hi) < q:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _ml_cdf_array(beta, 1.0, mid) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-6 * hi:
            break
    t = 0.5 * (lo + hi)
    for _ in range(50):
        f = float(_ml_cdf_array(beta, 1.0, t)) - q
        if abs(f) <= 1e-14:
            break
        step = f / float(_ml_pdf_array(beta, 1.0, t))
        t_new = t - step
        if not lo <= t_new <= hi:
            t_new = 0.5 * (lo + hi)
        if f > 0:
            hi = t
        else:
            lo = t
        if abs(t_new - t) <= 1e-15 * t:
            t = t_new
            break
        t = t_new
    return t


def ml_quantile(p: MlParams, q):
    """Quantile function of ML(beta, sigma) for q in (0, 1)."""
    q_arr = np.asarray(q, dtype=float)
    if np.any(~((q_arr > 0) & (q_arr < 1))):
        raise DomainError("quantile level must lie in (0, 1)")
    if p.beta == 1.0:
        out = -np.log1p(-q_arr) * p.sigma
    else:
        flat = [p.sigma * _quantile_scalar(p.beta, qi) for qi in q_arr.ravel()]
        out = np.asarray(flat).reshape(q_arr.shape)
    return float(out) if out.ndim == 0 else out


def ml_sample(p: MlParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n variates of ML(beta, sigma).

    Uses ``sigma * E**(1/beta) * D_beta`` with E unit exponential and ``D_beta``
    one-sided stable with Laplace transform ``exp(-s**beta)``.
    """
    from .stable import _stable_unit

    if n < 1:
        raise DomainError("n must be at least 1")
    e = rng.standard_exponential(n)
    if p.beta == 1.0:
        return p.sigma * e
    return p.sigma * e ** (1.0 / p.beta) * _stable_unit(p.beta, n, rng)
