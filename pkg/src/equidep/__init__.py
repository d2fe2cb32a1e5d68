"""Copula correlation and companion dependence measures."""

from .ccor import CcorResult, ccor_corrected, ccor_multivariate, ccor_raw, cmax, cmin
from .copula_core import EmpiricalCopula, PseudoSample, Sample, empirical_copula_eval, pseudo_observations
from .errors import InvalidInputError, UnsupportedDimensionError
from .kde import CopulaDensityEstimate, default_bandwidth, estimate_copula_density
from .measures import ALL_KINDS, MeasureResult, compute_measure, compute_measures

__version__ = "0.1.0"

__all__ = [
    "ALL_KINDS",
    "CcorResult",
    "CopulaDensityEstimate",
    "EmpiricalCopula",
    "InvalidInputError",
    "MeasureResult",
    "PseudoSample",
    "Sample",
    "UnsupportedDimensionError",
    "ccor_corrected",
    "ccor_multivariate",
    "ccor_raw",
    "cmax",
    "cmin",
    "compute_measure",
    "compute_measures",
    "default_bandwidth",
    "empirical_copula_eval",
    "estimate_copula_density",
    "pseudo_observations",
]
