"""Scenario generators: ARMAX magnitudes and i.i.d. waiting times.

Random streams are derived from ``(seed, *keys)`` through
:class:`numpy.random.SeedSequence` feeding a counter-based Philox generator,
so every replicate and every stream (magnitudes, waits) is reproducible on
its own, whatever order replicates run in.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import DomainError
from .mlf import MlParams, ml_sample
from .pot import EventSeries
from .stable import StableParams, frechet_sample, pareto_mean1_sample, stable_sample

__all__ = [
    "WaitingKind",
    "ScenarioSpec",
    "make_rng",
    "armax_sequence",
    "waiting_times",
    "build_series",
    "shifted_pareto_minimum",
]

STREAM_MAGNITUDES = 1
STREAM_WAITS = 2


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the stream addressed by ``(seed, *keys)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


class WaitingKind(enum.Enum):
    EXPONENTIAL = "exp"
    DIRAC1 = "dirac"
    PARETO_MEAN1 = "pareto"  # parameter: tail index alpha > 1
    STABLE = "stable"  # parameter: beta in (0, 1)
    MITTAG_LEFFLER = "ml"  # parameter: beta in (0, 1)
    SHIFTED_PARETO = "spareto"  # parameter: beta in (0, 1)

    @property
    def tail_parameter_free(self) -> bool:
        return self in (WaitingKind.STABLE, WaitingKind.MITTAG_LEFFLER, WaitingKind.SHIFTED_PARETO)

    @property
    def needs_parameter(self) -> bool:
        return self.tail_parameter_free or self is WaitingKind.PARETO_MEAN1


def _check_kind(kind: WaitingKind, param):
    if kind.needs_parameter and param is None:
        raise DomainError(f"waiting kind {kind.value!r} needs a parameter")
    if kind is WaitingKind.PARETO_MEAN1 and not param > 1.0:
        raise DomainError(f"Pareto index must exceed 1, got {param!r}")
    if kind.tail_parameter_free and not 0.0 < param < 1.0:
        raise DomainError(f"tail parameter must lie in (0, 1), got {param!r}")


@dataclass(frozen=True)
class ScenarioSpec:
    """One Monte-Carlo scenario: ARMAX(theta) magnitudes with i.i.d. waits."""

    theta: float
    waiting_kind: WaitingKind
    param: float | None = None
    n: int = 10_000
    seed: int = 0
    frac: float = 0.02

    def __post_init__(self):
        object.__setattr__(self, "waiting_kind", WaitingKind(self.waiting_kind))
        if not 0.0 < self.theta <= 1.0:
            raise DomainError(f"theta must lie in (0, 1], got {self.theta!r}")
        _check_kind(self.waiting_kind, self.param)
        if not self.waiting_kind.needs_parameter and self.param is not None:
            raise DomainError(f"waiting kind {self.waiting_kind.value!r} takes no parameter")
        if self.n < 2:
            raise DomainError("series length must be at least 2")
        if not 0.0 < self.frac < 1.0:
            raise DomainError(f"frac must lie in (0, 1), got {self.frac!r}")

    @property
    def beta(self) -> float:
        """Tail parameter of the limit law: 1 unless the waits have infinite mean."""
        return float(self.param) if self.waiting_kind.tail_parameter_free else 1.0

    @property
    def label(self) -> str:
        """Compact identifier, e.g. ``ml(0.8)/theta=0.8/n=10000``."""
        kind = self.waiting_kind.value
        if self.param is not None:
            kind = f"{kind}({self.param:g})"
        return f"{kind}/theta={self.theta:g}/n={self.n}"


def armax_sequence(theta: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Max-autoregressive sequence with unit Frechet margins and extremal index theta.

    ``X_1 = Y_1``, ``X_{i+1} = max((1 - theta) X_i, theta Y_{i+1})``.
    """
    if not 0.0 < theta <= 1.0:
        raise DomainError(f"theta must lie in (0, 1], got {theta!r}")
    y = frechet_sample(n, rng)
    if theta == 1.0:
        return y
    # X_i = max_j (1-theta)^(i-j) c_j with c_1 = Y_1, c_j = theta Y_j; in logs the
    # recursion is a running max of log c_j - j*log(1-theta), shifted back.
    c = theta * y
    c[0] = y[0]
    # log(0) for a zero Frechet draw is harmless under the max
    with np.errstate(divide="ignore"):
        log_c = np.log(c)
    idx = np.arange(n)
    log_r = np.log1p(-theta)
    run = np.maximum.accumulate(log_c - idx * log_r)
    return np.exp(run + idx * log_r)


def shifted_pareto_minimum(beta: float) -> float:
    """Support endpoint ``1 + Gamma(1 - beta)**(-1/beta)`` of the shifted Pareto waits."""
    return 1.0 + gamma_fn(1.0 - beta) ** (-1.0 / beta)


def waiting_times(kind: WaitingKind | str, n: int, rng: np.random.Generator, param: float | None = None) -> np.ndarray:
    """I.i.d. waiting times of the given kind.

    ``param`` is the Pareto index for ``PARETO_MEAN1`` and the tail parameter
    beta for ``STABLE``, ``MITTAG_LEFFLER`` and ``SHIFTED_PARETO``.
    """
    kind = WaitingKind(kind)
    _check_kind(kind, param)
    if n < 1:
        raise DomainError("n must be at least 1")
    if kind is WaitingKind.EXPONENTIAL:
        return rng.standard_exponential(n)
    if kind is WaitingKind.DIRAC1:
        return np.ones(n)
    if kind is WaitingKind.PARETO_MEAN1:
        return pareto_mean1_sample(param, n, rng)
    if kind is WaitingKind.STABLE:
        return stable_sample(StableParams(param), n, rng)
    if kind is WaitingKind.MITTAG_LEFFLER:
        return ml_sample(MlParams(param, 1.0), n, rng)
    # P(W - 1 > t) = C t^-beta, C = 1/Gamma(1 - beta), t >= C^(1/beta)
    scale = gamma_fn(1.0 - param) ** (-1.0 / param)
    u = 1.0 - rng.random(n)
    return 1.0 + scale * u ** (-1.0 / param)


def build_series(spec: ScenarioSpec, replicate: int = 0) -> EventSeries:
    """Event series of a scenario; times are cumulative sums of the waits.

    Magnitudes and waits come from separate streams keyed by
    ``(spec.seed, replicate, stream)``.
    """
    mags = armax_sequence(spec.theta, spec.n, make_rng(spec.seed, replicate, STREAM_MAGNITUDES))
    waits = waiting_times(spec.waiting_kind, spec.n, make_rng(spec.seed, replicate, STREAM_WAITS), spec.param)
    return EventSeries(_strict_cumsum(waits), mags)


def _strict_cumsum(waits: np.ndarray) -> np.ndarray:
    """Cumulative sum, bumped by one ulp where a tiny wait is absorbed by rounding.

    With infinite-mean waits the running time can grow so large that a small
    wait no longer changes it; those times are moved to the next double so the
    series stays strictly increasing.
    """
    times = np.cumsum(waits)
    bad = np.flatnonzero(np.diff(times) <= 0)
    if bad.size:
        for i in range(bad[0] + 1, times.size):
            if times[i] <= times[i - 1]:
                times[i] = np.nextafter(times[i - 1], np.inf)
    return times
