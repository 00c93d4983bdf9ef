"""Bivariate copula modelling of paired fuel-economy gaps."""

from .copula import copula_cdf, copula_logpdf, copula_pdf, h_function, h_inverse
from .data_pipeline import (
    GaragePair,
    TrimReport,
    VehicleRecord,
    dependence_summary,
    descriptive_stats,
    load_and_pair,
    qq_data,
    trim_outliers,
)
from .dependence import kendall_tau_from_params, params_from_kendall_tau, tail_dependence
from .errors import (
    ConvergenceError,
    CopulaError,
    DataError,
    DegenerateError,
    DensityOverflowError,
    DomainError,
    TauRangeError,
)
from .estimation import FitResult, PseudoSample, fit_mle, log_likelihood, pseudo_observations, sample_kendall_tau
from .families import ALL_FAMILIES, CopulaFamily, CopulaParams, Kind, Rotation, parse_family, validate_params
from .selection import SelectionReport, fit_all_and_rank, lambda_empirical, lambda_theoretical
from .simulation import MarginModel, apply_margins, crosstab, generate_synthetic_dataset, prediction_report, sample_pairs

__version__ = "0.1.0"

__all__ = [
    "ALL_FAMILIES",
    "apply_margins",
    "ConvergenceError",
    "copula_cdf",
    "copula_logpdf",
    "copula_pdf",
    "CopulaError",
    "CopulaFamily",
    "CopulaParams",
    "crosstab",
    "DataError",
    "DegenerateError",
    "DensityOverflowError",
    "dependence_summary",
    "descriptive_stats",
    "DomainError",
    "fit_all_and_rank",
    "fit_mle",
    "FitResult",
    "GaragePair",
    "generate_synthetic_dataset",
    "h_function",
    "h_inverse",
    "kendall_tau_from_params",
    "Kind",
    "lambda_empirical",
    "lambda_theoretical",
    "load_and_pair",
    "log_likelihood",
    "MarginModel",
    "params_from_kendall_tau",
    "parse_family",
    "prediction_report",
    "pseudo_observations",
    "PseudoSample",
    "qq_data",
    "Rotation",
    "sample_kendall_tau",
    "sample_pairs",
    "SelectionReport",
    "tail_dependence",
    "TauRangeError",
    "trim_outliers",
    "TrimReport",
    "validate_params",
    "VehicleRecord",
]
