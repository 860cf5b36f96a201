"""Bivariate logistic regression with Gumbel's dependence term.

    p11 = F1 F2 + rho * sqrt(F1 S1 F2 S2),   S_j = 1 - F_j

with logistic marginals F_j. The admissible range of ``rho`` depends on the
marginals, so the likelihood is treated as -inf wherever any training row
would receive a joint probability at or below ``PROB_FLOOR``.
"""
from dataclasses import dataclass, field

import numpy as np

from ..numerics.logistic import ConvergenceError
from ..numerics.optimize import OptimProblem, newton_maximize
from ..numerics.special import expit
from ..risk import JointRisk
from .independent import _as_matrix, check_binary, fit_univariate
from .multinomial import require_all_categories

__all__ = ["GumbelMvlModel", "gumbel_joint", "fit_mvl", "predict_mvl", "mvl_loglik_problem", "rho_envelope"]

PROB_FLOOR = 1e-12
RHO_BOX = 0.99
BOUNDARY_TOL = 1e-4


def gumbel_joint(F1, F2, rho):
    """Joint risk and a flag that is False where any component leaves [0, 1]."""
    F1 = np.asarray(F1, dtype=float)
    F2 = np.asarray(F2, dtype=float)
    S1, S2 = 1.0 - F1, 1.0 - F2
    dep = rho * np.sqrt(F1 * S1 * F2 * S2)
    j = JointRisk(F1 * F2 + dep, F1 * S2 - dep, S1 * F2 - dep, S1 * S2 + dep)
    arr = j.as_array()
    valid = np.all((arr >= 0.0) & (arr <= 1.0), axis=-1)
    return j, valid


def rho_envelope(F1, F2):
    """Range of rho keeping every row's four probabilities non-negative."""
    F1 = np.asarray(F1, dtype=float)
    F2 = np.asarray(F2, dtype=float)
    S1, S2 = 1.0 - F1, 1.0 - F2
    s = np.sqrt(F1 * S1 * F2 * S2)
    hi = np.min(np.minimum(F1 * S2, S1 * F2) / s)
    lo = -np.min(np.minimum(F1 * F2, S1 * S2) / s)
    return max(lo, -RHO_BOX), min(hi, RHO_BOX)


def _split(theta, width):
    return theta[:width], theta[width:2 * width], theta[-1]


FEASIBILITY_RULES = ("all", "observed")


def mvl_loglik_problem(X, y1, y2, feasibility="all"):
    """Log-likelihood in theta = [beta1 (P+1), beta2 (P+1), rho] with analytic gradient.

    ``feasibility="all"`` treats a parameter vector as infeasible when any of
    the four cells drops to the floor on any training row; ``"observed"``
    only requires the cell each row actually fell into to stay positive.
    """
    if feasibility not in FEASIBILITY_RULES:
        raise ValueError(f"feasibility must be one of {FEASIBILITY_RULES}, got {feasibility!r}")
    X = _as_matrix(X)
    D = np.column_stack([np.ones(X.shape[0]), X])
    width = D.shape[1]
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    w11, w10 = y1 * y2, y1 * (1 - y2)
    w01, w00 = (1 - y1) * y2, (1 - y1) * (1 - y2)

    def pieces(theta):
        b1, b2, rho = _split(theta, width)
        F1, F2 = expit(D @ b1), expit(D @ b2)
        S1, S2 = 1 - F1, 1 - F2
        s = np.sqrt(F1 * S1 * F2 * S2)
        p = (F1 * F2 + rho * s, F1 * S2 - rho * s, S1 * F2 - rho * s, S1 * S2 + rho * s)
        return F1, F2, S1, S2, s, rho, p

    def objective(theta):
        if abs(theta[-1]) > RHO_BOX:
            return -np.inf
        *_, p = pieces(theta)
        if feasibility == "all":
            if min(float(np.min(q)) for q in p) <= PROB_FLOOR:
                return -np.inf
        else:
            observed = w11 * p[0] + w10 * p[1] + w01 * p[2] + w00 * p[3]
            if float(np.min(observed)) <= PROB_FLOOR:
                return -np.inf
            # unobserved cells may go negative; keep their logs out of the sum
            p = tuple(np.where(w > 0, q, 1.0) for q, w in zip(p, (w11, w10, w01, w00)))
        return float(np.sum(w11 * np.log(p[0]) + w10 * np.log(p[1]) + w01 * np.log(p[2]) + w00 * np.log(p[3])))

    def gradient(theta):
        F1, F2, S1, S2, s, rho, (p11, p10, p01, p00) = pieces(theta)
        # weight of each row's observed cell: y_ab / p_ab
        r11, r10, r01, r00 = (
            np.divide(w, q, out=np.zeros_like(q), where=w > 0)
            for w, q in ((w11, p11), (w10, p10), (w01, p01), (w00, p00))
        )
        v1, v2 = F1 * S1, F2 * S2
        h1 = rho * s * (1 - 2 * F1) / 2
        h2 = rho * s * (1 - 2 * F2) / 2
        d_lp1 = r11 * (v1 * F2 + h1) + r10 * (v1 * S2 - h1) + r01 * (-v1 * F2 - h1) + r00 * (-v1 * S2 + h1)
        d_lp2 = r11 * (v2 * F1 + h2) + r10 * (-v2 * F1 - h2) + r01 * (v2 * S1 - h2) + r00 * (-v2 * S1 + h2)
        d_rho = np.sum(s * (r11 - r10 - r01 + r00))
        return np.concatenate([D.T @ d_lp1, D.T @ d_lp2, [d_rho]])

    return OptimProblem(dimension=2 * width + 1, objective=objective, gradient=gradient), D


@dataclass
class GumbelMvlModel:
    method = "mlm"
    beta1: np.ndarray
    beta2: np.ndarray
    rho: float
    diagnostics: dict = field(default_factory=dict)

    def marginals(self, X):
        X = _as_matrix(X)
        return expit(self.beta1[0] + X @ self.beta1[1:]), expit(self.beta2[0] + X @ self.beta2[1:])

    def predict(self, X):
        return predict_mvl(self, X)

    def to_dict(self):
        keep = ("converged", "boundary", "min_training_prob", "rho_envelope", "iterations")
        return {
            "beta1": [float(v) for v in self.beta1],
            "beta2": [float(v) for v in self.beta2],
            "rho": float(self.rho),
            "diagnostics": {k: self.diagnostics[k] for k in keep if k in self.diagnostics},
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.asarray(d["beta1"], dtype=float),
            np.asarray(d["beta2"], dtype=float),
            float(d["rho"]),
            dict(d.get("diagnostics", {})),
        )


def fit_mvl(X, y1, y2, tol=1e-8, max_iter=200, feasibility="all"):
    """Maximum likelihood, started from the two univariate fits with rho = 0.

    See :func:`mvl_loglik_problem` for the two ``feasibility`` rules.
    """
    X = _as_matrix(X)
    y1 = check_binary(y1, "y1")
    y2 = check_binary(y2, "y2")
    require_all_categories(y1, y2)
    m1, m2 = fit_univariate(X, y1), fit_univariate(X, y2)
    init = np.concatenate([[m1.intercept], m1.coefficients, [m2.intercept], m2.coefficients, [0.0]])
    problem, D = mvl_loglik_problem(X, y1, y2, feasibility)
    width = D.shape[1]
    res = newton_maximize(problem, init, tol=tol, max_iter=max_iter)
    b1, b2, rho = _split(res.parameters, width)
    F1, F2 = expit(D @ b1), expit(D @ b2)
    lo, hi = rho_envelope(F1, F2)
    boundary = bool(rho - lo < BOUNDARY_TOL or hi - rho < BOUNDARY_TOL)
    joint, _ = gumbel_joint(F1, F2, rho)
    diagnostics = {
        "converged": bool(res.converged),
        "boundary": boundary,
        "iterations": res.iterations,
        "gradient_norm": res.gradient_norm,
        "loglik": res.objective_value,
        "min_training_prob": float(joint.as_array().min()),
        "rho_envelope": [float(lo), float(hi)],
        "clamped": 0,
        "feasibility": feasibility,
    }
    if not res.converged and not boundary and res.gradient_norm > 1e-6 * X.shape[0]:
        raise ConvergenceError(
            f"multivariate logistic fit did not converge (gradient {res.gradient_norm:.2e}, rho={rho:.4f})"
        )
    return GumbelMvlModel(b1.copy(), b2.copy(), float(rho), diagnostics)


def predict_mvl(m, X):
    """Gumbel joint risk; rows outside the admissible region are clamped to
    [PROB_FLOOR, 1] and renormalised, counted in ``diagnostics['clamped']``."""
    F1, F2 = m.marginals(X)
    joint, valid = gumbel_joint(F1, F2, m.rho)
    n_bad = int(np.size(valid) - np.count_nonzero(valid))
    if n_bad:
        m.diagnostics["clamped"] = m.diagnostics.get("clamped", 0) + n_bad
        arr = np.clip(joint.as_array(), PROB_FLOOR, 1.0)
        arr /= arr.sum(axis=-1, keepdims=True)
        joint = JointRisk.from_array(arr)
    return joint
