"""Performance measures for joint and marginal risk predictions."""
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .models.multinomial import joint_category, require_all_categories
from .numerics.logistic import ConvergenceError, fit_logistic
from .numerics.multinomial import fit_multinomial_logit
from .risk import MARGINAL_TARGETS, TARGETS, JointRisk

__all__ = [
    "MarginalCalibration",
    "JointCalibration",
    "MetricsReport",
    "marginal_citl",
    "marginal_slope",
    "marginal_calibration",
    "joint_calibration",
    "auc",
    "mse",
    "evaluate_model",
    "ALL_TARGETS",
    "METRICS",
]

PROB_CLAMP = 1e-10
ALL_TARGETS = TARGETS + MARGINAL_TARGETS
METRICS = ("citl", "slope", "auc", "mse")


@dataclass
class MarginalCalibration:
    citl: float
    slope: float


@dataclass
class JointCalibration:
    """Intercepts (slopes fixed at 1) and slopes for categories 11, 10, 01 vs 00."""

    citl: np.ndarray
    slope: np.ndarray


@dataclass
class MetricsReport:
    """``values[target][metric]``; mse is absent when no truth was supplied."""

    values: dict
    method: str = ""
    scenario: str = ""
    iteration: int = -1
    extras: dict = field(default_factory=dict)

    def rows(self):
        for target in ALL_TARGETS:
            for metric in METRICS:
                if metric in self.values[target]:
                    yield target, metric, self.values[target][metric]

    def to_dict(self):
        return {
            "method": self.method,
            "scenario": self.scenario,
            "iteration": self.iteration,
            "metrics": {t: {m: float(v) for m, v in d.items()} for t, d in self.values.items()},
        }


def _binary(y):
    y = np.asarray(y, dtype=float)
    if y.min() == y.max():
        raise ValueError("outcome has a single class; calibration and AUC are undefined")
    return y


def _clamped_logit(pred):
    p = np.clip(np.asarray(pred, dtype=float), PROB_CLAMP, 1.0 - PROB_CLAMP)
    return np.log(p) - np.log1p(-p)


def marginal_citl(pred, y):
    """Intercept of the recalibration model with logit(pred) as a fixed offset."""
    y = _binary(y)
    offset = _clamped_logit(pred)
    res = fit_logistic(np.ones((y.size, 1)), y, offset=offset, tol=1e-10)
    return float(res.parameters[0])


def marginal_slope(pred, y):
    """Coefficient on logit(pred) in a logistic recalibration model with free intercept."""
    y = _binary(y)
    lp = _clamped_logit(pred)
    if np.ptp(lp) == 0:
        raise ValueError("predictions are constant; the calibration slope is undefined")
    D = np.column_stack([np.ones(y.size), lp])
    res = fit_logistic(D, y)
    return float(res.parameters[1])


def marginal_calibration(pred, y):
    return MarginalCalibration(marginal_citl(pred, y), marginal_slope(pred, y))


def _log_ratios(preds):
    arr = np.clip(preds.as_array(), PROB_CLAMP, None)
    arr = arr / arr.sum(axis=1, keepdims=True)
    # columns: log(P11/P00), log(P10/P00), log(P01/P00)
    return np.log(arr[:, :3]) - np.log(arr[:, [3]])


def joint_calibration(preds, y1, y2):
    """Multinomial recalibration on the three log-ratios against P00.

    Intercepts: diagonal slopes fixed at 1 and cross slopes at 0 (offsets).
    Slopes: cross slopes at 0, intercepts and diagonal slopes estimated.
    """
    codes = require_all_categories(y1, y2)
    L = _log_ratios(preds)
    n = L.shape[0]
    ones = np.ones((n, 1))
    fit_a = fit_multinomial_logit([ones, ones, ones], codes, offsets=L, tol=1e-9)
    designs = [np.column_stack([ones, L[:, k]]) for k in range(3)]
    fit_b = fit_multinomial_logit(designs, codes, init=np.tile([0.0, 1.0], 3), tol=1e-9)
    for res, label in ((fit_a, "intercept"), (fit_b, "slope")):
        if not res.converged and res.gradient_norm > 1e-6 * n:
            raise ConvergenceError(f"joint calibration {label} fit did not converge")
    return JointCalibration(citl=fit_a.parameters.copy(), slope=fit_b.parameters[1::2].copy())


def auc(scores, labels):
    """Mann-Whitney AUC, ties counted one half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = labels == 1
    n1 = int(pos.sum())
    n0 = labels.size - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("AUC needs both cases and controls")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def mse(pred, truth):
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {truth.shape}")
    return float(np.mean((pred - truth) ** 2))


def evaluate_model(joint_preds, y1, y2, truth=None, method="", scenario="", iteration=-1):
    """Calibration, AUC and (with ``truth``) MSE for P11, P10, P01, PY1 and PY2.

    ``truth`` is a JointRisk (or anything with a ``joint`` attribute holding one).
    """
    y1 = np.asarray(y1).astype(int)
    y2 = np.asarray(y2).astype(int)
    if len(joint_preds) != y1.size or y1.size != y2.size:
        raise ValueError("predictions and outcomes have different lengths")
    truth_joint = getattr(truth, "joint", truth)
    codes = joint_category(y1, y2)
    jc = joint_calibration(joint_preds, y1, y2)
    values = {}
    for k, target in enumerate(TARGETS):
        indicator = codes == k + 1
        values[target] = {
            "citl": float(jc.citl[k]),
            "slope": float(jc.slope[k]),
            "auc": auc(joint_preds.target(target), indicator),
        }
    for target, y in zip(MARGINAL_TARGETS, (y1, y2)):
        pred = joint_preds.target(target)
        values[target] = {
            "citl": marginal_citl(pred, y),
            "slope": marginal_slope(pred, y),
            "auc": auc(pred, y),
        }
    if truth_joint is not None:
        if len(truth_joint) != y1.size:
            raise ValueError("truth has a different length from the outcomes")
        for target in ALL_TARGETS:
            values[target]["mse"] = mse(joint_preds.target(target), truth_joint.target(target))
    return MetricsReport(values, method, scenario, iteration)
