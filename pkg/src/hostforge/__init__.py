"""hostforge: statistically realistic Internet end-host populations.

Synthesizes correlated host resource sets (cores, memory, benchmark
speeds, free disk) for any calendar date, refits the underlying laws from
trace data, and evaluates populations with a Cobb-Douglas utility
allocation simulator against baseline models.
"""

__version__ = "0.1.0"

from .allocsim import (
    AppProfile,
    compare_models,
    default_profiles,
    greedy_round_robin,
    load_profiles,
    utility,
)
from .kernel import backend as kernel_backend
from .model import (
    CorrelationModel,
    DistLaw,
    ExpLaw,
    ModelParams,
    RatioChain,
    WeibullLaw,
    default_params,
    lognormal_params_from_moments,
    parse_when,
    predicted_moments,
    ratio_chain_pmf,
    year_fraction,
)
from .population import HostSpec, Population
from .rng import SeededStream
from .sampler import (
    cholesky,
    correlated_normals,
    generate_host,
    generate_population,
    grid_population,
    sample_discrete,
    sample_lifetime,
    standard_normal_cdf,
    standard_normal_ppf,
    uncorrelated_population,
)
from .statfit import (
    DistFamily,
    FitReport,
    best_fit,
    correlation_matrix,
    fit_exp_law,
    ks_pvalue,
    ks_statistic,
    mle_fit,
    pearson,
    subsampled_ks,
)

__all__ = [
    "__version__",
    "AppProfile",
    "CorrelationModel",
    "DistFamily",
    "DistLaw",
    "ExpLaw",
    "FitReport",
    "HostSpec",
    "ModelParams",
    "Population",
    "RatioChain",
    "SeededStream",
    "WeibullLaw",
    "best_fit",
    "cholesky",
    "compare_models",
    "correlated_normals",
    "correlation_matrix",
    "default_params",
    "default_profiles",
    "fit_exp_law",
    "generate_host",
    "generate_population",
    "greedy_round_robin",
    "grid_population",
    "kernel_backend",
    "ks_pvalue",
    "ks_statistic",
    "load_profiles",
    "lognormal_params_from_moments",
    "mle_fit",
    "parse_when",
    "pearson",
    "predicted_moments",
    "ratio_chain_pmf",
    "sample_discrete",
    "sample_lifetime",
    "standard_normal_cdf",
    "standard_normal_ppf",
    "subsampled_ks",
    "uncorrelated_population",
    "utility",
    "year_fraction",
]
