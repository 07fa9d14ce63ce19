"""Out-of-sample prediction-error projections for linear regression.

PRESS, jackknife residuals, out-of-sample leverage, and deployment-time
projections of out-of-sample mean squared error, plus a reproducible
Monte Carlo harness.
"""

__version__ = "0.1.0"

from .diagnostics import (
    OosProjection,
    VarianceModel,
    actual_test_mse,
    fit_variance_model,
    jackknife_residuals,
    mse_nonstochastic,
    oos_leverage,
    press,
    project_oos,
    scaled_sq_residuals,
)
from .linalg import (
    Dataset,
    HatMatrix,
    OlsFit,
    OosHatMatrix,
    fit_ols,
    hat_matrix,
    oos_hat_matrix,
    predict,
)
from .simulation import (
    ErrorProcess,
    IterationResult,
    PredictorDesign,
    SimConfig,
    TrueProcess,
    beta_for_unit_variance,
    generate_sample,
    run_grid,
    run_iteration,
)

__all__ = [
    "Dataset", "OlsFit", "HatMatrix", "OosHatMatrix",
    "fit_ols", "hat_matrix", "oos_hat_matrix", "predict",
    "OosProjection", "VarianceModel",
    "jackknife_residuals", "press", "mse_nonstochastic",
    "scaled_sq_residuals", "fit_variance_model", "oos_leverage",
    "project_oos", "actual_test_mse",
    "TrueProcess", "SimConfig", "IterationResult",
    "ErrorProcess", "PredictorDesign",
    "beta_for_unit_variance", "generate_sample", "run_iteration", "run_grid",
]
