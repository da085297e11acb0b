"""Fractional compound Poisson modelling of clustered extreme events.

Inter-exceedance times of a peaks-over-threshold analysis are fitted with the
mixture ``(1 - theta) * delta_0 + theta * ML(beta, theta**(-1/beta) * sigma)``
by minimising a modified Cramer-von Mises distance.
"""

from .errors import (
    DegenerateSampleError,
    DomainError,
    FcppError,
    InsufficientDataError,
    OptimizationError,
    ParseError,
)
from .mlf import MlParams, mlf_e, ml_cdf, ml_pdf, ml_quantile, ml_sample
from .stable import StableParams, frechet_sample, pareto_mean1_sample, stable_sample
from .mixture import FcppParams, ModelFamily, mixture_cdf, mixture_sample, rho_of
from .pot import EventSeries, IetSample, extract_iets, threshold_from_fraction
from .estimators import (
    FitResult,
    cm_distance,
    cmmod_distance,
    fit_cmmod,
    interval_estimator,
    log_moment_estimator,
    ml_mle,
)
from .simulate import ScenarioSpec, WaitingKind, armax_sequence, build_series, waiting_times
from .study import StudyResult, run_study, timing_profile

__version__ = "0.1.0"
