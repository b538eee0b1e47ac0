from estimators.issp import (
    DerivedConstants,
    IsspConfig,
    IsspDiagnostics,
    IsspEstimator,
    IsspOutput,
    Outcome,
    derived_constants,
    issp_fit,
)
from estimators.sigma_estimator import SigmaConfig, block_statistics, estimate_sigma_squared, geometric_bin
