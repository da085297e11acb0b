"""Parameter estimation for the inter-exceedance-time mixture.

The main estimator minimises the modified Cramer-von Mises distance (CMmod)
between the empirical cdf of the shifted IETs ``t + 1`` and the mixture cdf,
with bounded quasi-Newton search started from a grid of points. The interval
estimator (beta pinned to 1), the log-moment estimator and maximum likelihood
for the Mittag-Leffler law (theta pinned to 1) serve as competitors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateSampleError, DomainError, InsufficientDataError, OptimizationError
from .mixture import FcppParams, ModelFamily, _mixture_cdf_array
from .mlf import _ml_pdf_array
from .pot import IetSample

__all__ = [
    "IetSample",
    "FitResult",
    "StartDiagnostics",
    "cm_distance",
    "cmmod_distance",
    "fit_cmmod",
    "interval_estimator",
    "log_moment_estimator",
    "ml_mle",
    "fit_estimator",
    "ESTIMATORS",
]

ESTIMATORS = ("cmmod", "interval", "logmom", "mle")

START_GRID = (0.25, 0.55, 0.85)
SHIFT = 1.0

# optimizer settings per start
_FTOL = 1e-12
_GTOL = 1e-8
_MAXITER = 500
_FD_STEP = 1e-6
_TIE = 1e-12
_LOG_SIGMA_CLAMP = 700.0


@dataclass(frozen=True)
class StartDiagnostics:
    start: tuple[float, float, float]
    end: tuple[float, float, float]
    value: float
    converged: bool
    iterations: int
    message: str


@dataclass(frozen=True)
class FitResult:
    """Fitted mixture parameters plus how they were obtained.

    ``distance`` is the CMmod distance at ``params`` for every estimator, so
    fits from different estimators can be compared on one scale.
    """

    params: FcppParams
    rho: float | None
    distance: float
    family: ModelFamily
    estimator_name: str
    k: int
    n_star: int | None = None
    p_hat: float | None = None
    starts: tuple[StartDiagnostics, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        """JSON-ready report."""
        return {
            "model": self.family.value.upper(),
            "estimator": self.estimator_name,
            "params": {
                "beta": self.params.beta,
                "theta": self.params.theta,
                "sigma": self.params.sigma,
                "rho": self.rho,
            },
            "distance": self.distance,
            "k": self.k,
            "n_star": self.n_star,
            "p_hat": self.p_hat,
            "diagnostics": {
                "starts": [
                    {
                        "start": list(d.start),
                        "end": list(d.end),
                        "value": d.value,
                        "converged": d.converged,
                        "iterations": d.iterations,
                        "message": d.message,
                    }
                    for d in self.starts
                ],
            },
        }


def _rho(sigma, beta, p_hat):
    if p_hat is None:
        return None
    return sigma * p_hat ** (1.0 / beta)


def _require_fittable(s: IetSample):
    if s.k < 2:
        raise InsufficientDataError(f"need at least 2 inter-exceedance times, got {s.k}")


# ---------------------------------------------------------------------------
# criterion functions


def _cm_value(sorted_t, beta, theta, sigma):
    k = sorted_t.size
    i = np.arange(1, k + 1)
    f = _mixture_cdf_array(beta, theta, sigma, sorted_t)
    return float(np.mean(((i - 0.5) / k - f) ** 2) + 1.0 / (12.0 * k * k) + (2.0 / 3.0) * (1.0 - theta) ** 3)


def cm_distance(s: IetSample, p: FcppParams) -> float:
    """Cramer-von Mises distance between the empirical cdf of the IETs and the mixture.

    The atom at zero contributes ``(1 - theta)**3`` to the integral against
    the mixture; written as a sum over the ordered sample this is

        (1/k) sum_i ((i - 1/2)/k - F(t_(i)))**2 + 1/(12 k**2) + (2/3)(1 - theta)**3
    """
    return _cm_value(s.iets, p.beta, p.theta, p.sigma)


def _cmmod_value(shifted, beta, theta, sigma):
    """CMmod for sorted, already shifted IETs."""
    k = shifted.size
    kc = k * (1.0 - theta)
    l = math.ceil(kc)
    # theta < 1/k: plateau; test theta directly, k * (1 - theta) can round to k - 1
    if theta < 1.0 / k or l >= k:
        return 1.0 / 3.0
    th3 = theta**3
    if l > 0:
        f = _mixture_cdf_array(beta, theta, sigma, shifted[l - 1 :])
        f_l, f_tail = f[0], f[1:]
    else:
        f_l, f_tail = 0.0, _mixture_cdf_array(beta, theta, sigma, shifted)
    i = np.arange(l + 1, k + 1)
    value = np.sum(((i - 0.5) / k - f_tail) ** 2) / (k * th3)
    value += (k - l) / (12.0 * k**3 * th3)
    if l > 0:
        value -= (kc**3 - l**3) / (3.0 * k**3 * th3)
        value += (kc**2 - l**2) / (k**2 * th3) * f_l
        value -= (kc - l) / (k * th3) * f_l**2
    return float(value)


def cmmod_distance(s: IetSample, p: FcppParams) -> float:
    """Modified Cramer-von Mises distance.

    Integrates ``(max(F~_k, 1 - theta) - F)**2 / theta**2`` against the
    continuous component only, where ``F~_k`` is the empirical cdf of the
    shifted sample ``t + 1``. With ``l = ceil(k (1 - theta))`` the ordered
    points ``1..l`` only enter through ``F(t_(l) + 1)``. For ``theta < 1/k``
    every point is absorbed by the truncation and the value is reported as the
    limiting constant 1/3.
    """
    return _cmmod_value(s.iets + SHIFT, p.beta, p.theta, p.sigma)


# ---------------------------------------------------------------------------
# competitors


def interval_estimator(s: IetSample) -> tuple[float, float | None]:
    """Interval estimator of the extremal index, adapted to IETs below one.

    Returns ``(theta_hat, rho_hat)`` where ``rho_hat = p_hat * mean(iets)``
    (beta pinned to 1); ``rho_hat`` is None when the sample has no ``n_star``.
    """
    _require_fittable(s)
    t = s.iets
    k = s.k
    if np.any(t > 2.0):
        a = np.maximum(t - 1.0, 0.0)
        b = np.maximum(t - 2.0, 0.0)
        num = 2.0 * a.sum() ** 2
        den = k * np.sum(a * b)
    else:
        num = 2.0 * t.sum() ** 2
        den = k * np.sum(t * t)
    if den == 0.0:
        raise DegenerateSampleError("interval estimator denominator vanishes")
    theta = min(num / den, 1.0)
    return float(theta), _rho(float(t.mean()), 1.0, s.p_hat)


_EULER = np.euler_gamma


def _log_moment_formula(mean_ln, var_ln):
    """Invert ``E log T = log sigma - gamma_E``, ``Var log T = (pi**2/6)(2/beta**2 - 1)``."""
    if not var_ln > 0.0:
        raise DegenerateSampleError("log inter-exceedance times have zero variance")
    beta = math.pi * math.sqrt(2.0) / math.sqrt(math.pi**2 + 6.0 * var_ln)
    return min(beta, 1.0), math.exp(mean_ln + _EULER)


def _log_moments(t):
    logs = np.log(t)
    return _log_moment_formula(float(logs.mean()), float(logs.var(ddof=1)))


def log_moment_estimator(s: IetSample) -> tuple[float, float]:
    """Log-moment estimator of ML(beta, sigma).

    Uses ``E log T = log sigma - gamma_E`` and
    ``Var log T = (pi**2 / 6) (2 / beta**2 - 1)``; beta is clipped to 1.
    """
    _require_fittable(s)
    return _log_moments(s.iets)


def _ml_loglik(t, beta, sigma):
    with np.errstate(divide="ignore", invalid="ignore"):
        ll = np.sum(np.log(_ml_pdf_array(beta, sigma, t)))
    return float(ll) if np.isfinite(ll) else -np.inf


def ml_mle(s: IetSample) -> tuple[float, float]:
    """Maximum likelihood for ML(beta, sigma) over (0, 1] x (0, inf).

    Starts from the log-moment estimate and never returns a point with lower
    likelihood than that start.
    """
    _require_fittable(s)
    t = s.iets
    b0, s0 = _log_moments(t)
    ll0 = _ml_loglik(t, b0, s0)

    def nll(z):
        ll = _ml_loglik(t, z[0], math.exp(z[1]))
        return -ll if np.isfinite(ll) else 1e300

    res = minimize(
        nll,
        np.array([b0, math.log(s0)]),
        method="L-BFGS-B",
        bounds=[(1e-3, 1.0), (None, None)],
        options={"ftol": _FTOL, "gtol": _GTOL, "maxiter": _MAXITER},
    )
    if not np.isfinite(res.fun) and not np.isfinite(ll0):
        raise OptimizationError(f"maximum likelihood failed: {res.message}")
    beta, sigma = float(res.x[0]), float(math.exp(res.x[1]))
    if _ml_loglik(t, beta, sigma) < ll0:
        return b0, s0
    return beta, sigma


# ---------------------------------------------------------------------------
# minimum distance fit


def _forward_gradient(fun, z, f0, upper):
    g = np.empty_like(z)
    for j in range(z.size):
        h = _FD_STEP * max(abs(z[j]), 1.0)
        zj = z.copy()
        if upper[j] is not None and z[j] + h > upper[j]:
            h = -h
        zj[j] = z[j] + h
        g[j] = (fun(zj) - f0) / h
    return g


def _start_points(family: ModelFamily, a: float, sigma0: float):
    grid = [min(max(v, a), 1.0) for v in START_GRID]
    betas = grid if family.beta_free else [1.0]
    thetas = grid if family.theta_free else [1.0]
    return [(b, th, sigma0) for b in betas for th in thetas]


def _better(cand, best):
    """Smallest value; near ties go to larger theta, then larger beta."""
    if best is None:
        return True
    if cand[0] < best[0] - _TIE:
        return True
    if cand[0] > best[0] + _TIE:
        return False
    return (cand[2], cand[1]) > (best[2], best[1])


def fit_cmmod(s: IetSample, a: float = 0.1, family: ModelFamily | str = ModelFamily.FCPP) -> FitResult:
    """Minimum-CMmod-distance fit of (beta, theta, sigma).

    beta and theta range over ``[a, 1]`` unless pinned to 1 by ``family``;
    sigma is searched on the log scale. L-BFGS-B runs from every point of
    ``{0.25, 0.55, 0.85}`` for each free shape parameter, with the log-moment
    scale of the shifted sample as starting sigma, and the best converged
    end point is returned.
    """
    family = ModelFamily.parse(family)
    _require_fittable(s)
    if not 0.0 < a < 1.0:
        raise DomainError(f"lower bound a must lie in (0, 1), got {a!r}")
    if a <= 1.0 / s.k:
        raise DomainError(f"lower bound a={a} must exceed 1/k = {1.0 / s.k:.4g}")
    if s.iets[0] == s.iets[-1]:
        raise DegenerateSampleError("all inter-exceedance times are identical")

    shifted = s.iets + SHIFT
    _, sigma0 = _log_moments(shifted)

    free_b, free_t = family.beta_free, family.theta_free
    bounds = ([(a, 1.0)] if free_b else []) + ([(a, 1.0)] if free_t else []) + [(None, None)]
    upper = [b[1] for b in bounds]

    def unpack(z):
        j = 0
        beta = theta = 1.0
        if free_b:
            beta = float(z[j])
            j += 1
        if free_t:
            theta = float(z[j])
            j += 1
        # clamp keeps exp finite and positive if a line search strays far
        return beta, theta, math.exp(min(max(z[j], -_LOG_SIGMA_CLAMP), _LOG_SIGMA_CLAMP))

    def objective(z):
        return _cmmod_value(shifted, *unpack(z))

    def fun_and_grad(z):
        f0 = objective(z)
        return f0, _forward_gradient(objective, z, f0, upper)

    diagnostics = []
    best = None
    for beta0, theta0, sig0 in _start_points(family, a, sigma0):
        z0 = np.array(([beta0] if free_b else []) + ([theta0] if free_t else []) + [math.log(sig0)])
        res = minimize(
            fun_and_grad,
            z0,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"ftol": _FTOL, "gtol": _GTOL, "maxiter": _MAXITER},
        )
        end = unpack(res.x)
        value = objective(res.x)
        converged = bool(np.isfinite(value)) and res.status != 1
        diagnostics.append(
            StartDiagnostics(
                start=(beta0, theta0, sig0),
                end=end,
                value=value,
                converged=converged,
                iterations=int(res.nit),
                message=str(res.message),
            )
        )
        if converged and _better((value, end[0], end[1]), best):
            best = (value, end[0], end[1], end[2])

    if best is None:
        raise OptimizationError("no optimizer start converged")
    value, beta, theta, sigma = best
    params = FcppParams(beta, theta, sigma)
    return FitResult(
        params=params,
        rho=_rho(sigma, beta, s.p_hat),
        distance=value,
        family=family,
        estimator_name="cmmod",
        k=s.k,
        n_star=s.n_star,
        p_hat=s.p_hat,
        starts=tuple(diagnostics),
    )


def fit_estimator(
    s: IetSample,
    estimator: str = "cmmod",
    a: float = 0.1,
    family: ModelFamily | str = ModelFamily.FCPP,
) -> FitResult:
    """Run any estimator and wrap the result as a :class:`FitResult`.

    The competitors fix the family themselves: the interval estimator is CPP,
    the log-moment and likelihood estimators are FPP.
    """
    if estimator == "cmmod":
        return fit_cmmod(s, a=a, family=family)
    if estimator == "interval":
        theta, _ = interval_estimator(s)
        params = FcppParams(1.0, theta, float(s.iets.mean()))
        fam = ModelFamily.CPP
    elif estimator == "logmom":
        beta, sigma = log_moment_estimator(s)
        params = FcppParams(beta, 1.0, sigma)
        fam = ModelFamily.FPP
    elif estimator == "mle":
        beta, sigma = ml_mle(s)
        params = FcppParams(beta, 1.0, sigma)
        fam = ModelFamily.FPP
    else:
        raise DomainError(f"unknown estimator {estimator!r}; choose from {ESTIMATORS}")
    return FitResult(
        params=params,
        rho=_rho(params.sigma, params.beta, s.p_hat),
        distance=cmmod_distance(s, params),
        family=fam,
        estimator_name=estimator,
        k=s.k,
        n_star=s.n_star,
        p_hat=s.p_hat,
    )
