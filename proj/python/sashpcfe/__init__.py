from ._core import (
    ConfigError,
    DimensionMismatch,
    DomainError,
    Error,
    NumericalError,
    ParameterDomainError,
    UnsupportedDimension,
    benchmark_names,
    failure_probability,
    fd_cost,
    fit_hpcfe,
    fit_spce,
    limit_state,
    mcs,
    reliability_index,
    run_study,
    sas_hpcfe,
    sobol_points,
)

__all__ = [
    "ConfigError",
    "DimensionMismatch",
    "DomainError",
    "Error",
    "NumericalError",
    "ParameterDomainError",
    "UnsupportedDimension",
    "benchmark_names",
    "failure_probability",
    "fd_cost",
    "fit_hpcfe",
    "fit_spce",
    "limit_state",
    "mcs",
    "reliability_index",
    "run_study",
    "sas_hpcfe",
    "sobol_points",
]
