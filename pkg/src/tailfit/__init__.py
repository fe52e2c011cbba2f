"""Rank-based estimation of bivariate and spatial extremal tail dependence."""

from .bench import StudyResult, StudySpec, resolve_threads, run_study
from .empirical import (
    RankedSample,
    TailIndexChoice,
    empirical_Q,
    rank_transform,
    rect_integral_Q,
    select_khat,
    tilde_c,
)
from .errors import TailfitError
from .families import Rectangle, TailFamily, get_family
from .mestim import (
    BivariateFit,
    FitOptions,
    WeightScheme,
    default_weights,
    fit_bivariate,
    plugin_covariance_AI,
    preset_weights,
)
from .simulate import SimSpec, rng_for, simulate
from .spatial import (
    SpatialFit,
    SpatialModel,
    fit_joint,
    fit_least_squares,
    pairwise_fits,
)

__version__ = "0.1.0"

__all__ = [
    "BivariateFit",
    "FitOptions",
    "RankedSample",
    "Rectangle",
    "SimSpec",
    "SpatialFit",
    "SpatialModel",
    "StudyResult",
    "StudySpec",
    "TailFamily",
    "TailIndexChoice",
    "TailfitError",
    "WeightScheme",
    "default_weights",
    "empirical_Q",
    "fit_bivariate",
    "fit_joint",
    "fit_least_squares",
    "get_family",
    "pairwise_fits",
    "plugin_covariance_AI",
    "preset_weights",
    "rank_transform",
    "rect_integral_Q",
    "resolve_threads",
    "rng_for",
    "run_study",
    "select_khat",
    "simulate",
    "tilde_c",
]
