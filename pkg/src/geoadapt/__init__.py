"""Model-based geostatistical survey design.

Gaussian random field modeling with Matern correlation, maximum-likelihood
parameter estimation, spatial prediction, and adaptive batch design under a
minimum-distance rule, plus a simulation harness and a round-based campaign
service.
"""

from geoadapt._core import backend_name
from geoadapt.data import SurveyData
from geoadapt.design import (
    AdaptiveState,
    Design,
    RefitPerBatch,
    adaptive_next_batch,
    inhibitory_design,
    random_design,
    run_adaptive_design,
)
from geoadapt.errors import (
    CampaignError,
    GeoadaptError,
    InfeasibleDesignError,
    InferenceError,
    SingularCovarianceError,
)
from geoadapt.experiment import (
    CellResult,
    ExperimentConfig,
    ExperimentResult,
    emit_results,
    run_experiment,
)
from geoadapt.field import FieldSimulator, simulate_field
from geoadapt.geometry import Location, Region, regular_grid
from geoadapt.kriging import (
    PredictionResult,
    apv,
    exceedance_probability,
    krige,
    prediction_variance_surface,
)
from geoadapt.likelihood import FitOptions, FitResult, fit_ml, gaussian_log_likelihood, gls_beta
from geoadapt.model import (
    FieldRealization,
    MaternParams,
    ModelSpec,
    covariance_matrix,
    empirical_logit,
    matern_correlation,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveState",
    "CampaignError",
    "CellResult",
    "Design",
    "ExperimentConfig",
    "ExperimentResult",
    "FieldRealization",
    "FieldSimulator",
    "FitOptions",
    "FitResult",
    "GeoadaptError",
    "InfeasibleDesignError",
    "InferenceError",
    "Location",
    "MaternParams",
    "ModelSpec",
    "PredictionResult",
    "Region",
    "SingularCovarianceError",
    "SurveyData",
    "adaptive_next_batch",
    "apv",
    "backend_name",
    "covariance_matrix",
    "emit_results",
    "empirical_logit",
    "exceedance_probability",
    "fit_ml",
    "gaussian_log_likelihood",
    "gls_beta",
    "inhibitory_design",
    "krige",
    "matern_correlation",
    "prediction_variance_surface",
    "random_design",
    "regular_grid",
    "run_adaptive_design",
    "run_experiment",
    "simulate_field",
    "__version__",
]
