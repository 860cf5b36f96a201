"""The six joint-risk methods behind one fit/predict interface.

Tags: ``univariate`` (separate logistic models), ``sr`` (stacked
regression), ``pcc`` (classifier chains), ``mlr`` (multinomial logistic),
``mlm`` (Gumbel multivariate logistic), ``mpm`` (Bayesian multivariate probit).
"""
from ..numerics.rng import RngStream
from .gumbel import GumbelMvlModel, fit_mvl, gumbel_joint, predict_mvl
from .independent import (
    StackedModel,
    UnivariateLogisticModel,
    UnivariatePair,
    fit_stacked,
    fit_univariate,
    fit_univariate_pair,
    predict_stacked_joint,
    predict_univariate_joint,
)
from .multinomial import MultinomialModel, fit_multinomial, predict_multinomial
from .pcc import PccModel, fit_pcc, predict_pcc
from .probit import GibbsConfig, ProbitPosterior, fit_probit, predict_probit

METHODS = ("univariate", "sr", "pcc", "mlr", "mlm", "mpm")

MODEL_CLASSES = {
    "univariate": UnivariatePair,
    "sr": StackedModel,
    "pcc": PccModel,
    "mlr": MultinomialModel,
    "mlm": GumbelMvlModel,
    "mpm": ProbitPosterior,
}


def check_method(method):
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose one of: {', '.join(METHODS)}")
    return method


def fit_method(method, X, y1, y2, rng=None, gibbs=None, lambda_policy="cv"):
    """Fit one method; ``rng`` feeds the stacked-regression folds and the probit sampler."""
    check_method(method)
    rng = RngStream(0) if rng is None else rng
    if method == "univariate":
        return fit_univariate_pair(X, y1, y2)
    if method == "sr":
        return fit_stacked(X, y1, y2, lambda_policy=lambda_policy, rng=rng.child("cv-folds"))
    if method == "pcc":
        return fit_pcc(X, y1, y2)
    if method == "mlr":
        return fit_multinomial(X, y1, y2)
    if method == "mlm":
        return fit_mvl(X, y1, y2)
    return fit_probit(X, y1, y2, gibbs or GibbsConfig(), rng=rng.child("gibbs"))
