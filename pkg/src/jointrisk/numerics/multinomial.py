"""Reference-category multinomial logistic likelihood.

Category 0 is the reference; category k >= 1 has linear predictor
``designs[k-1] @ theta_k + offsets[:, k-1]``. Designs may differ in width
per category, which lets callers fix coefficients by moving them into the
offset.
"""
import numpy as np
from scipy.special import logsumexp

from .optimize import OptimProblem, newton_maximize

__all__ = ["multinomial_problem", "fit_multinomial_logit", "softmax_with_reference"]


def softmax_with_reference(eta):
    """Probabilities (n, K+1) from non-reference linear predictors (n, K); column 0 is the reference."""
    eta = np.asarray(eta, dtype=float)
    full = np.column_stack([np.zeros(eta.shape[0]), eta])
    return np.exp(full - logsumexp(full, axis=1, keepdims=True))


def multinomial_problem(designs, y, offsets=None):
    designs = [np.asarray(D, dtype=float) for D in designs]
    K = len(designs)
    n = designs[0].shape[0]
    y = np.asarray(y, dtype=int)
    offsets = np.zeros((n, K)) if offsets is None else np.asarray(offsets, dtype=float)
    widths = [D.shape[1] for D in designs]
    splits = np.cumsum(widths)[:-1]
    onehot = np.zeros((n, K))
    for k in range(K):
        onehot[:, k] = y == k + 1

    def eta_of(theta):
        parts = np.split(theta, splits)
        return np.column_stack([designs[k] @ parts[k] for k in range(K)]) + offsets

    def objective(theta):
        eta = eta_of(theta)
        full = np.column_stack([np.zeros(n), eta])
        return float(np.sum(np.sum(onehot * eta, axis=1) - logsumexp(full, axis=1)))

    def gradient(theta):
        prob = softmax_with_reference(eta_of(theta))[:, 1:]
        resid = onehot - prob
        return np.concatenate([designs[k].T @ resid[:, k] for k in range(K)])

    def hessian(theta):
        prob = softmax_with_reference(eta_of(theta))[:, 1:]
        H = np.empty((sum(widths), sum(widths)))
        starts = np.concatenate([[0], np.cumsum(widths)])
        for k in range(K):
            for m in range(k, K):
                w = prob[:, k] * ((k == m) - prob[:, m])
                block = -(designs[k].T * w) @ designs[m]
                H[starts[k]:starts[k + 1], starts[m]:starts[m + 1]] = block
                H[starts[m]:starts[m + 1], starts[k]:starts[k + 1]] = block.T
        return H

    return OptimProblem(dimension=sum(widths), objective=objective, gradient=gradient, hessian=hessian)


def fit_multinomial_logit(designs, y, offsets=None, init=None, tol=1e-8, max_iter=200):
    problem = multinomial_problem(designs, y, offsets)
    x0 = np.zeros(problem.dimension) if init is None else np.asarray(init, dtype=float)
    return newton_maximize(problem, x0, tol=tol, max_iter=max_iter)
