"""Models that treat the two outcomes as conditionally independent given X:
separate logistic regressions and two-stage stacked regression."""
from dataclasses import dataclass, field

import numpy as np

from ..numerics.logistic import cv_select_lambda, fit_logistic, lambda_grid, lasso_logistic
from ..numerics.rng import RngStream
from ..numerics.special import expit
from ..risk import product_joint

__all__ = [
    "UnivariateLogisticModel",
    "UnivariatePair",
    "StackedModel",
    "fit_univariate",
    "fit_univariate_pair",
    "predict_univariate_joint",
    "fit_stacked",
    "predict_stacked_joint",
]


def _as_matrix(X):
    X = np.asarray(X, dtype=float)
    return X[None, :] if X.ndim == 1 else X


def check_binary(y, name="outcome"):
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError(f"{name} must contain only 0/1 values")
    if y.min() == y.max():
        raise ValueError(f"{name} has a single class (all {int(y[0])}); cannot fit a risk model")
    return y.astype(float)


@dataclass
class UnivariateLogisticModel:
    intercept: float
    coefficients: np.ndarray
    iterations: int = 0

    def linear_predictor(self, X):
        return self.intercept + _as_matrix(X) @ self.coefficients

    def predict(self, X):
        return expit(self.linear_predictor(X))

    def to_dict(self):
        return {"intercept": float(self.intercept), "coefficients": [float(c) for c in self.coefficients]}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["intercept"]), np.asarray(d["coefficients"], dtype=float))


def fit_univariate(X, y, name="outcome"):
    """Unpenalised maximum-likelihood logistic regression of ``y`` on ``X``."""
    X = _as_matrix(X)
    y = check_binary(y, name)
    if X.shape[0] <= X.shape[1] + 1:
        raise ValueError("need more rows than parameters")
    D = np.column_stack([np.ones(X.shape[0]), X])
    res = fit_logistic(D, y)
    return UnivariateLogisticModel(res.parameters[0], res.parameters[1:].copy(), res.iterations)


@dataclass
class UnivariatePair:
    """One logistic model per outcome; the joint risk is their product."""

    method = "univariate"
    model1: UnivariateLogisticModel
    model2: UnivariateLogisticModel

    def predict(self, X):
        return predict_univariate_joint(self.model1, self.model2, X)

    def to_dict(self):
        return {"model1": self.model1.to_dict(), "model2": self.model2.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(UnivariateLogisticModel.from_dict(d["model1"]), UnivariateLogisticModel.from_dict(d["model2"]))


def fit_univariate_pair(X, y1, y2):
    return UnivariatePair(fit_univariate(X, y1, "y1"), fit_univariate(X, y2, "y2"))


def predict_univariate_joint(m1, m2, X):
    return product_joint(m1.predict(X), m2.predict(X))


# ---------------------------------------------------------------------------
# stacked regression
# ---------------------------------------------------------------------------


@dataclass
class StackedModel:
    """Stage-1 logistic models feed their linear predictors into L1-penalised
    stage-2 models, one per outcome.

    Each stage-2 vector is ``[intercept, w_f1, w_f2, delta_1, ..., delta_P]``.
    """

    method = "sr"
    stage1: tuple
    stage2_outcome1: np.ndarray
    stage2_outcome2: np.ndarray
    lambda1: float
    lambda2: float
    diagnostics: dict = field(default_factory=dict)

    def stage2_design(self, X):
        X = _as_matrix(X)
        f1 = self.stage1[0].linear_predictor(X)
        f2 = self.stage1[1].linear_predictor(X)
        return np.column_stack([f1, f2, X])

    def marginals(self, X):
        Z = self.stage2_design(X)
        c1, c2 = self.stage2_outcome1, self.stage2_outcome2
        return expit(c1[0] + Z @ c1[1:]), expit(c2[0] + Z @ c2[1:])

    def predict(self, X):
        return predict_stacked_joint(self, X)

    def to_dict(self):
        return {
            "stage1": [m.to_dict() for m in self.stage1],
            "stage2_outcome1": [float(v) for v in self.stage2_outcome1],
            "stage2_outcome2": [float(v) for v in self.stage2_outcome2],
            "lambda1": float(self.lambda1),
            "lambda2": float(self.lambda2),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            tuple(UnivariateLogisticModel.from_dict(m) for m in d["stage1"]),
            np.asarray(d["stage2_outcome1"], dtype=float),
            np.asarray(d["stage2_outcome2"], dtype=float),
            float(d["lambda1"]),
            float(d["lambda2"]),
        )


def _stage2_lambda(Z, y, policy, rng, folds, n_lambda):
    if policy == "cv":
        grid = lambda_grid(Z, y, n_lambda=n_lambda)
        return cv_select_lambda(Z, y, folds, grid, rng)
    lam = float(policy)
    if lam < 0:
        raise ValueError("fixed lambda must be non-negative")
    return lam


def fit_stacked(X, y1, y2, lambda_policy="cv", rng=None, folds=10, n_lambda=50):
    """Two-stage stacked regression.

    ``lambda_policy`` is ``"cv"`` (10-fold cross-validated deviance over a
    50-point log grid, folds stratified on the outcome) or a fixed penalty.
    The two outcomes draw independent fold assignments.
    """
    X = _as_matrix(X)
    y1 = check_binary(y1, "y1")
    y2 = check_binary(y2, "y2")
    rng = RngStream(0) if rng is None else rng
    m1, m2 = fit_univariate(X, y1), fit_univariate(X, y2)
    Z = np.column_stack([m1.linear_predictor(X), m2.linear_predictor(X), X])
    lam1 = _stage2_lambda(Z, y1, lambda_policy, rng.child("cv-y1"), folds, n_lambda)
    lam2 = _stage2_lambda(Z, y2, lambda_policy, rng.child("cv-y2"), folds, n_lambda)
    c1 = lasso_logistic(Z, y1, lam1)
    c2 = lasso_logistic(Z, y2, lam2)
    return StackedModel((m1, m2), c1, c2, lam1, lam2)


def predict_stacked_joint(m, X):
    p1, p2 = m.marginals(X)
    return product_joint(p1, p2)
