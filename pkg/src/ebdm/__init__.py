"""Empirical Bayes toolkit for valuing evidence-based decision making.

Estimates how much a portfolio of randomized evaluations is worth to a
launch/no-launch decision maker, from nothing more than the studies'
point estimates and standard errors, and projects that value under
counterfactual precision levels.
"""

from .errors import (
    DataError,
    DegenerateFallbackWarning,
    EbdmError,
    NumericalError,
    ValidationError,
)
from .gaussian import (
    CostModel,
    DesignSpec,
    GaussianPrior,
    PosteriorParams,
    Signal,
    d2v_dsigma_sq2,
    diff_in_means_variance,
    dv_dgamma_sq,
    dv_dsigma_sq,
    expected_payoff,
    expected_payoff_many,
    lift_variance,
    norm_cdf,
    norm_pdf,
    payoff_no_info,
    posterior_params,
    voe,
    void,
)
from .mixture import (
    GaussianMixturePrior,
    MonteCarloEstimate,
    mixture_expected_payoff_mc,
    mixture_posterior_mean,
)
from .npmle import (
    DiscreteDistribution,
    FitReport,
    Grid,
    NpmleConfig,
    fit_npmle,
    log_likelihood,
    make_grid,
    posterior_mean_scaled,
)
from .estimators import (
    PayoffEstimate,
    PriorMoments,
    Study,
    StudySet,
    bootstrap_interval,
    bootstrap_replicates,
    estimate_prior_moments,
    nonparametric_heteroskedastic,
    nonparametric_homoskedastic,
    parametric_heteroskedastic,
    parametric_homoskedastic,
)
from .counterfactual import (
    CounterfactualCurve,
    counterfactual_direct,
    counterfactual_resample,
    lambda_sweep,
)
from .simulation import (
    DGPSpec,
    SimRow,
    SimulationTable,
    SyntheticTarget,
    cochrane_target,
    dgp_gaussian,
    dgp_mixture,
    generate_synthetic_meta,
    run_simulation_study,
    sample_replication,
)

__version__ = "0.1.0"

__all__ = [
    "CostModel",
    "CounterfactualCurve",
    "DGPSpec",
    "DataError",
    "DegenerateFallbackWarning",
    "DesignSpec",
    "DiscreteDistribution",
    "EbdmError",
    "FitReport",
    "GaussianMixturePrior",
    "GaussianPrior",
    "Grid",
    "MonteCarloEstimate",
    "NpmleConfig",
    "NumericalError",
    "PayoffEstimate",
    "PosteriorParams",
    "PriorMoments",
    "Signal",
    "SimRow",
    "SimulationTable",
    "Study",
    "StudySet",
    "SyntheticTarget",
    "ValidationError",
    "bootstrap_interval",
    "bootstrap_replicates",
    "cochrane_target",
    "counterfactual_direct",
    "counterfactual_resample",
    "d2v_dsigma_sq2",
    "dgp_gaussian",
    "dgp_mixture",
    "diff_in_means_variance",
    "dv_dgamma_sq",
    "dv_dsigma_sq",
    "estimate_prior_moments",
    "expected_payoff",
    "expected_payoff_many",
    "fit_npmle",
    "generate_synthetic_meta",
    "lambda_sweep",
    "lift_variance",
    "log_likelihood",
    "make_grid",
    "mixture_expected_payoff_mc",
    "mixture_posterior_mean",
    "nonparametric_heteroskedastic",
    "nonparametric_homoskedastic",
    "norm_cdf",
    "norm_pdf",
    "parametric_heteroskedastic",
    "parametric_homoskedastic",
    "payoff_no_info",
    "posterior_mean_scaled",
    "posterior_params",
    "run_simulation_study",
    "sample_replication",
    "voe",
    "void",
]
