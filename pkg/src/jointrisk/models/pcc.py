"""Probabilistic classifier chains for two outcomes, ensembled over both orderings."""
from dataclasses import dataclass

import numpy as np

from ..numerics.logistic import SeparationError
from ..risk import JointRisk
from .independent import UnivariateLogisticModel, _as_matrix, check_binary, fit_univariate

__all__ = ["PccModel", "fit_pcc", "predict_pcc", "chain_joint"]


@dataclass
class PccModel:
    """Chain 1 models Y1|X then Y2|X,Y1; chain 2 models Y2|X then Y1|X,Y2.

    The conditional models carry the preceding outcome as their last coefficient.
    """

    method = "pcc"
    perm1_marginal: UnivariateLogisticModel
    perm1_conditional: UnivariateLogisticModel
    perm2_marginal: UnivariateLogisticModel
    perm2_conditional: UnivariateLogisticModel

    @property
    def gamma1(self):
        return float(self.perm1_conditional.coefficients[-1])

    @property
    def gamma2(self):
        return float(self.perm2_conditional.coefficients[-1])

    def predict(self, X):
        return predict_pcc(self, X)

    def to_dict(self):
        return {
            "perm1_marginal": self.perm1_marginal.to_dict(),
            "perm1_conditional": self.perm1_conditional.to_dict(),
            "perm2_marginal": self.perm2_marginal.to_dict(),
            "perm2_conditional": self.perm2_conditional.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(*(UnivariateLogisticModel.from_dict(d[k]) for k in (
            "perm1_marginal", "perm1_conditional", "perm2_marginal", "perm2_conditional")))


def _fit_named(X, y, label):
    try:
        return fit_univariate(X, y)
    except SeparationError as exc:
        raise SeparationError(f"classifier chain submodel {label}: {exc}") from exc


def fit_pcc(X, y1, y2):
    X = _as_matrix(X)
    y1 = check_binary(y1, "y1")
    y2 = check_binary(y2, "y2")
    if X.shape[0] <= X.shape[1] + 2:
        raise ValueError("need more rows than parameters")
    return PccModel(
        _fit_named(X, y1, "Y1|X"),
        _fit_named(np.column_stack([X, y1]), y2, "Y2|X,Y1"),
        _fit_named(X, y2, "Y2|X"),
        _fit_named(np.column_stack([X, y2]), y1, "Y1|X,Y2"),
    )


def _conditional(model, X, prev):
    """P(next = 1 | X, previous outcome = prev)."""
    Xp = np.column_stack([X, np.full(X.shape[0], float(prev))])
    return model.predict(Xp)


def chain_joint(marginal, conditional, X, first):
    """Joint risk from one chain. ``first`` is 1 when the chain starts with Y1."""
    X = _as_matrix(X)
    pa = marginal.predict(X)
    pb_given1 = _conditional(conditional, X, 1)
    pb_given0 = _conditional(conditional, X, 0)
    both = pa * pb_given1
    a_only = pa * (1 - pb_given1)
    b_only = (1 - pa) * pb_given0
    neither = (1 - pa) * (1 - pb_given0)
    if first == 1:
        return JointRisk(both, a_only, b_only, neither)
    return JointRisk(both, b_only, a_only, neither)


def predict_pcc(m, X):
    c1 = chain_joint(m.perm1_marginal, m.perm1_conditional, X, first=1)
    c2 = chain_joint(m.perm2_marginal, m.perm2_conditional, X, first=2)
    return JointRisk(
        0.5 * (c1.p11 + c2.p11),
        0.5 * (c1.p10 + c2.p10),
        0.5 * (c1.p01 + c2.p01),
        0.5 * (c1.p00 + c2.p00),
    )
