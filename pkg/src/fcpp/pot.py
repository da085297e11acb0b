"""Peaks-over-threshold preprocessing: thresholds, exceedances, inter-exceedance times."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError, DomainError, InsufficientDataError

__all__ = ["EventSeries", "IetSample", "threshold_from_fraction", "extract_iets"]


@dataclass(frozen=True, eq=False)
class EventSeries:
    """Marked point process: event times, magnitudes and optional segment ids.

    Times must increase strictly within a segment. Without segments the whole
    series is one segment.
    """

    times: np.ndarray
    magnitudes: np.ndarray
    segments: np.ndarray | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        mags = np.asarray(self.magnitudes, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "magnitudes", mags)
        if times.ndim != 1 or times.shape != mags.shape:
            raise DomainError("times and magnitudes must be 1-d and of equal length")
        if times.size < 2:
            raise DomainError("an event series needs at least two events")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(mags))):
            raise DomainError("times and magnitudes must be finite")
        if self.segments is None:
            if np.any(np.diff(times) <= 0):
                raise DomainError("event times must be strictly increasing")
        else:
            seg = np.asarray(self.segments)
            if seg.shape != times.shape:
                raise DomainError("segment ids must match the number of events")
            object.__setattr__(self, "segments", seg)
            same = seg[1:] == seg[:-1]
            if np.any(np.diff(times)[same] <= 0):
                raise DomainError("event times must be strictly increasing within a segment")

    def __len__(self):
        return self.times.size

    def __eq__(self, other):
        if not isinstance(other, EventSeries):
            return NotImplemented
        seg_eq = (self.segments is None and other.segments is None) or (
            self.segments is not None
            and other.segments is not None
            and np.array_equal(self.segments, other.segments)
        )
        return (
            np.array_equal(self.times, other.times)
            and np.array_equal(self.magnitudes, other.magnitudes)
            and seg_eq
        )


@dataclass(frozen=True, eq=False)
class IetSample:
    """Sorted positive inter-exceedance times with exceedance bookkeeping.

    ``k`` counts IETs, ``n_star`` is the (1-based) event index of the last
    exceedance and ``p_hat = k / n_star`` estimates the exceedance probability.
    Estimators need ``k >= 2``; a single IET is representable but not fittable.
    """

    iets: np.ndarray
    n_star: int | None = None
    threshold: float | None = None

    def __post_init__(self):
        iets = np.sort(np.asarray(self.iets, dtype=float).ravel())
        object.__setattr__(self, "iets", iets)
        if iets.size < 1:
            raise InsufficientDataError("need at least one inter-exceedance time")
        if not np.all(np.isfinite(iets)) or iets[0] <= 0:
            raise DomainError("inter-exceedance times must be positive and finite")
        if self.n_star is not None and self.n_star < iets.size:
            raise DomainError("n_star cannot be smaller than the number of IETs")

    @property
    def k(self) -> int:
        return int(self.iets.size)

    @property
    def p_hat(self) -> float | None:
        if self.n_star is None:
            return None
        return self.k / self.n_star


def threshold_from_fraction(series: EventSeries, frac: float) -> float:
    """Order-statistic threshold leaving ``ceil(frac * n)`` magnitudes above it.

    The threshold is the (n-k)-th smallest magnitude. Exceedance is strict, so
    ties at the threshold lower the count; fewer than two exceedances is an
    error.
    """
    if not 0.0 < frac < 1.0:
        raise DomainError(f"frac must lie in (0, 1), got {frac!r}")
    n = len(series)
    # round first so that e.g. 0.02 * 10000 counts as exactly 200
    k = math.ceil(round(frac * n, 9))
    if k < 2:
        raise InsufficientDataError(f"frac * n gives {k} exceedance(s); need at least 2")
    if k >= n:
        raise DomainError("frac leaves no magnitude at or below the threshold")
    mags = np.sort(series.magnitudes)
    u = float(mags[n - k - 1])
    if np.count_nonzero(series.magnitudes > u) < 2:
        raise DegenerateSampleError("ties at the threshold leave fewer than 2 exceedances")
    return u


def exceedance_indices(series: EventSeries, u: float) -> np.ndarray:
    """0-based indices of events with magnitude strictly above u."""
    return np.flatnonzero(series.magnitudes > u)


def extract_iets(series: EventSeries, u: float) -> IetSample:
    """Inter-exceedance times of strict exceedances of u.

    The first exceedance (per segment) anchors the sequence and contributes no
    IET. With segment ids, gaps between exceedances in different segments are
    dropped.
    """
    idx = exceedance_indices(series, u)
    if idx.size < 2:
        raise InsufficientDataError(f"{idx.size} exceedance(s) of u={u!r}; need at least 2")
    gaps = np.diff(series.times[idx])
    if series.segments is not None:
        seg = series.segments[idx]
        gaps = gaps[seg[1:] == seg[:-1]]
    if gaps.size < 1:
        raise InsufficientDataError("no two exceedances share a segment")
    return IetSample(gaps, n_star=int(idx[-1]) + 1, threshold=float(u))
