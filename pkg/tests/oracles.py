"""Quadrature references for the distance criteria.

They integrate the defining integrals directly (adaptive quadrature between
the jumps of the empirical cdf), so they share only ``ml_cdf``/``ml_pdf``
with the library, not the closed-form sum algebra under test.
"""

import numpy as np
from scipy.integrate import quad

from fcpp import FcppParams, MlParams, ml_cdf, ml_pdf

_OPTS = dict(epsabs=1e-15, epsrel=1e-11, limit=200)


def _piecewise_quad(fun, breaks):
    edges = np.concatenate([[0.0], np.unique(breaks)])
    total = sum(quad(fun, lo, hi, **_OPTS)[0] for lo, hi in zip(edges[:-1], edges[1:]))
    return total + quad(fun, edges[-1], np.inf, **_OPTS)[0]


def _ecdf(points):
    pts = np.sort(points)
    return lambda t: np.searchsorted(pts, t, side="right") / pts.size


def cm_integral(iets, p: FcppParams) -> float:
    """Integral of (F_k - F)**2 against the mixture law, atom at 0 included."""
    comp = MlParams(p.beta, p.component_scale)
    fk = _ecdf(iets)

    def g(t):
        f = (1 - p.theta) + p.theta * ml_cdf(comp, t)
        return (fk(t) - f) ** 2 * p.theta * ml_pdf(comp, t)

    atom = (1 - p.theta) * (1 - p.theta) ** 2
    return atom + _piecewise_quad(g, iets)


def cmmod_integral(iets, p: FcppParams) -> float:
    """(1/theta**2) * integral of (max(F~_k, 1 - theta) - F)**2 dF*, F~_k the ecdf of t + 1."""
    comp = MlParams(p.beta, p.component_scale)
    shifted = np.asarray(iets) + 1.0
    fk = _ecdf(shifted)

    def g(t):
        f = (1 - p.theta) + p.theta * ml_cdf(comp, t)
        return (max(fk(t), 1 - p.theta) - f) ** 2 * ml_pdf(comp, t)

    return _piecewise_quad(g, shifted) / p.theta**2
