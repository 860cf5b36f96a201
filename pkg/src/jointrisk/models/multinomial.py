"""Multinomial logistic regression over the four outcome combinations,
with {Y1=0, Y2=0} as the reference category."""
from dataclasses import dataclass, field

import numpy as np

from ..numerics.logistic import ConvergenceError, SeparationError
from ..numerics.multinomial import fit_multinomial_logit, softmax_with_reference
from ..risk import JointRisk
from .independent import _as_matrix, check_binary

__all__ = ["MultinomialModel", "fit_multinomial", "predict_multinomial", "joint_category", "CATEGORY_NAMES"]

# non-reference categories in coefficient order; code 0 is the 00 reference
CATEGORY_NAMES = ("11", "10", "01")


def joint_category(y1, y2):
    """Integer code per row: 0 -> 00, 1 -> 11, 2 -> 10, 3 -> 01."""
    y1 = np.asarray(y1).astype(int)
    y2 = np.asarray(y2).astype(int)
    code = np.zeros(y1.shape, dtype=int)
    code[(y1 == 1) & (y2 == 1)] = 1
    code[(y1 == 1) & (y2 == 0)] = 2
    code[(y1 == 0) & (y2 == 1)] = 3
    return code


def require_all_categories(y1, y2):
    codes = joint_category(y1, y2)
    counts = np.bincount(codes, minlength=4)
    names = ("(Y1=0, Y2=0)", "(Y1=1, Y2=1)", "(Y1=1, Y2=0)", "(Y1=0, Y2=1)")
    missing = [names[k] for k in range(4) if counts[k] == 0]
    if missing:
        raise ValueError(f"outcome combination {', '.join(missing)} never observed")
    return codes


@dataclass
class MultinomialModel:
    """``coefficients`` has shape (3, P+1): rows are categories 11, 10, 01
    against 00; column 0 is the intercept."""

    method = "mlr"
    coefficients: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def linear_predictors(self, X):
        X = _as_matrix(X)
        return self.coefficients[:, 0] + X @ self.coefficients[:, 1:].T

    def predict(self, X):
        return predict_multinomial(self, X)

    def to_dict(self):
        return {"coefficients": self.coefficients.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["coefficients"], dtype=float))


def fit_multinomial(X, y1, y2):
    X = _as_matrix(X)
    y1 = check_binary(y1, "y1")
    y2 = check_binary(y2, "y2")
    codes = require_all_categories(y1, y2)
    D = np.column_stack([np.ones(X.shape[0]), X])
    res = fit_multinomial_logit([D, D, D], codes)
    if res.diagnostics.get("diverged"):
        raise SeparationError("multinomial coefficients diverged; a category appears separated")
    if not res.converged and res.gradient_norm > 1e-6 * X.shape[0]:
        raise ConvergenceError(f"multinomial fit did not converge (gradient {res.gradient_norm:.2e})")
    coef = res.parameters.reshape(3, D.shape[1])
    return MultinomialModel(coef, {"iterations": res.iterations, "gradient_norm": res.gradient_norm})


def predict_multinomial(m, X):
    prob = softmax_with_reference(m.linear_predictors(X))
    return JointRisk(prob[:, 1], prob[:, 2], prob[:, 3], prob[:, 0])
