"""Numerical building blocks shared by the models and metrics."""
from .logistic import (
    ConvergenceError,
    SeparationError,
    cv_select_lambda,
    fit_logistic,
    lambda_grid,
    lambda_max,
    lasso_logistic,
    lasso_path,
)
from .optimize import OptimProblem, OptimResult, newton_maximize
from .rng import RngStream, sample_truncated_normal, truncated_normal_array
from .special import (
    bivariate_normal_cdf,
    expit,
    logit,
    std_normal_cdf,
    std_normal_quantile,
)
