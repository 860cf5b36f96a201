"""Joint and marginal risk prediction for two correlated binary outcomes.

Six methods share one interface (``fit_method(tag, X, y1, y2).predict(X)``
returns a :class:`JointRisk`): separate logistic models, stacked regression,
probabilistic classifier chains, multinomial logistic regression, the Gumbel
bivariate logistic model and a Bayesian bivariate probit model.
"""
from .datagen import GenConfig, SyntheticDataset, generate_dataset, scenario_grid
from .metrics import MetricsReport, evaluate_model
from .models import METHODS, GibbsConfig, fit_method
from .numerics.rng import RngStream
from .risk import JointRisk

__version__ = "0.1.0"

__all__ = [
    "GenConfig",
    "GibbsConfig",
    "JointRisk",
    "METHODS",
    "MetricsReport",
    "RngStream",
    "SyntheticDataset",
    "evaluate_model",
    "fit_method",
    "generate_dataset",
    "scenario_grid",
]
