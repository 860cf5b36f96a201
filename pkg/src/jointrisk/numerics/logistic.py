"""Logistic likelihoods: unpenalised Newton fits, L1-penalised coordinate
descent, and cross-validated choice of the L1 penalty."""
import logging
import math

import numpy as np
from numba import njit
from scipy import special as sc

from .optimize import OptimProblem, newton_maximize

__all__ = [
    "logistic_loglik",
    "logistic_problem",
    "fit_logistic",
    "lasso_logistic",
    "lasso_path",
    "lambda_max",
    "lambda_grid",
    "cv_select_lambda",
    "binomial_deviance",
    "SeparationError",
    "ConvergenceError",
]

log = logging.getLogger(__name__)


class SeparationError(RuntimeError):
    """Coefficients diverge: the outcome is (quasi-)separated by the covariates."""


class ConvergenceError(RuntimeError):
    pass


def logistic_loglik(beta, D, y, offset=0.0):
    eta = D @ beta + offset
    # y*eta - log(1+exp(eta)), written stably
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def logistic_problem(D, y, offset=0.0):
    D = np.asarray(D, dtype=float)
    y = np.asarray(y, dtype=float)

    def grad(beta):
        return D.T @ (y - sc.expit(D @ beta + offset))

    def hess(beta):
        p = sc.expit(D @ beta + offset)
        return -(D.T * (p * (1 - p))) @ D

    return OptimProblem(
        dimension=D.shape[1],
        objective=lambda b: logistic_loglik(b, D, y, offset),
        gradient=grad,
        hessian=hess,
    )


def fit_logistic(D, y, offset=0.0, init=None, tol=1e-8, max_iter=200):
    """Unpenalised logistic MLE for design matrix ``D`` (intercept column included by caller).

    Raises SeparationError when the fit diverges and ConvergenceError when
    the iteration cap is hit.
    """
    y = np.asarray(y)
    if y.min() == y.max():
        raise ValueError("outcome has a single class; logistic MLE does not exist")
    problem = logistic_problem(D, y, offset)
    x0 = np.zeros(problem.dimension) if init is None else np.asarray(init, dtype=float)
    res = newton_maximize(problem, x0, tol=tol, max_iter=max_iter)
    if res.diagnostics.get("diverged"):
        raise SeparationError(
            f"coefficients diverged (max |beta| = {np.max(np.abs(res.parameters)):.1f}); "
            "the outcome appears separated by the covariates"
        )
    if not res.converged:
        # tolerance can be unreachable purely through round-off on large n
        scale = max(1.0, float(np.sum(np.abs(y))))
        if res.gradient_norm > 1e-6 * scale:
            raise ConvergenceError(
                f"logistic fit did not converge (gradient max-norm {res.gradient_norm:.2e})"
            )
    return res


# ---------------------------------------------------------------------------
# L1-penalised logistic regression
# ---------------------------------------------------------------------------


def lambda_max(X, y):
    """Smallest penalty at which every penalised coefficient is zero."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.max(np.abs(X.T @ (y - y.mean()))) / X.shape[0])


def lambda_grid(X, y, n_lambda=50, min_ratio=1e-4):
    top = lambda_max(X, y)
    return np.exp(np.linspace(math.log(top), math.log(top * min_ratio), n_lambda))


@njit(cache=True)
def _mean_nll(eta, y):
    total = 0.0
    for i in range(eta.size):
        e = eta[i]
        if e > 0:
            total += e + math.log1p(math.exp(-e)) - y[i] * e
        else:
            total += math.log1p(math.exp(e)) - y[i] * e
    return total / eta.size


def _penalized_objective(beta, D, y, lam, pen, eta=None):
    eta = D @ beta if eta is None else eta
    return _mean_nll(eta, y) + lam * np.sum(pen * np.abs(beta))


@njit(cache=True)
def _cd_quadratic(G, c, beta, lam, pen, tol=1e-12, max_sweeps=10_000):
    """Coordinate descent for 0.5 b'Gb - c'b + lam * sum(pen*|b|)."""
    beta = beta.copy()
    p = beta.size
    for _ in range(max_sweeps):
        biggest = 0.0
        for j in range(p):
            if G[j, j] <= 0.0:
                continue
            r = c[j] + G[j, j] * beta[j]
            for k in range(p):
                r -= G[j, k] * beta[k]
            t = lam * pen[j]
            shrunk = abs(r) - t
            new = 0.0
            if shrunk > 0.0:
                new = (shrunk if r > 0 else -shrunk) / G[j, j]
            biggest = max(biggest, abs(new - beta[j]))
            beta[j] = new
        if biggest < tol:
            break
    return beta


def _lasso_fit(D, y, lam, pen, beta0, tol, max_iter):
    """Proximal Newton (IRLS outer, coordinate descent inner) with backtracking."""
    n = D.shape[0]
    beta = beta0.copy()
    eta = D @ beta
    obj = _penalized_objective(beta, D, y, lam, pen, eta)
    for it in range(max_iter):
        prob = sc.expit(eta)
        w = np.maximum(prob * (1 - prob), 1e-5)
        G = (D.T * w) @ D / n
        # quadratic model of -loglik/n around beta: 0.5 d'Gd - grad'd
        c = G @ beta + D.T @ (y - prob) / n
        target = _cd_quadratic(G, c, beta, lam, pen, tol=min(1e-12, 0.01 * tol))
        step = target - beta
        d_eta = D @ step
        t = 1.0
        while True:
            cand = beta + t * step
            cand_eta = eta + t * d_eta
            new_obj = _penalized_objective(cand, D, y, lam, pen, cand_eta)
            if new_obj <= obj + 1e-15 or t < 1e-10:
                break
            t *= 0.5
        change = np.max(np.abs(cand - beta))
        beta, eta, obj = cand, cand_eta, new_obj
        if change < tol:
            return beta, it + 1
    raise ConvergenceError(f"lasso did not converge in {max_iter} iterations at lambda={lam:g}")


def _design(X):
    X = np.asarray(X, dtype=float)
    return np.column_stack([np.ones(X.shape[0]), X])


def _penalty_vector(p, unpenalized):
    pen = np.ones(p + 1)
    pen[0] = 0.0
    for j in unpenalized:
        pen[j + 1] = 0.0
    return pen


def lasso_logistic(X, y, lam, unpenalized=(), init=None, tol=1e-10, max_iter=500):
    """L1-penalised logistic regression.

    Minimises ``-loglik/n + lam * sum_j |beta_j|`` over the columns of ``X``
    (the intercept is added here and never penalised). Columns listed in
    ``unpenalized`` are excluded from the penalty. Returns
    ``[intercept, coef_1, ..., coef_P]``.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    y = np.asarray(y, dtype=float)
    D = _design(X)
    pen = _penalty_vector(D.shape[1] - 1, unpenalized)
    if init is None:
        ybar = np.clip(y.mean(), 1e-10, 1 - 1e-10)
        init = np.zeros(D.shape[1])
        init[0] = math.log(ybar / (1 - ybar))
    beta, _ = _lasso_fit(D, y, lam, pen, np.asarray(init, dtype=float), tol, max_iter)
    return beta


def lasso_path(X, y, grid, unpenalized=(), tol=1e-10, max_iter=500):
    """Warm-started fits along a descending penalty grid; shape (len(grid), P+1)."""
    y = np.asarray(y, dtype=float)
    D = _design(X)
    pen = _penalty_vector(D.shape[1] - 1, unpenalized)
    ybar = np.clip(y.mean(), 1e-10, 1 - 1e-10)
    beta = np.zeros(D.shape[1])
    beta[0] = math.log(ybar / (1 - ybar))
    out = np.empty((len(grid), D.shape[1]))
    for i, lam in enumerate(grid):
        beta, _ = _lasso_fit(D, y, lam, pen, beta, tol, max_iter)
        out[i] = beta
    return out


def binomial_deviance(eta, y):
    return float(-2.0 * np.mean(y * eta - np.logaddexp(0.0, eta)))


def stratified_folds(y, folds, rng):
    """Fold label per row, stratified by outcome class; deterministic given ``rng``."""
    y = np.asarray(y)
    labels = np.empty(y.size, dtype=int)
    offset = 0
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.size)]
        labels[idx] = (np.arange(idx.size) + offset) % folds
        offset += idx.size
    return labels


def cv_select_lambda(X, y, folds, grid, rng, unpenalized=(), path_tol=1e-6):
    """Penalty from ``grid`` minimising mean out-of-fold binomial deviance."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("lambda grid is empty")
    if folds < 2:
        raise ValueError("need at least two folds")
    if grid.size == 1:
        return float(grid[0])
    if np.any(np.diff(grid) > 0):
        raise ValueError("lambda grid must be sorted in descending order")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    labels = stratified_folds(y, folds, rng)
    total = np.zeros(grid.size)
    used = 0
    for k in range(folds):
        train, test = labels != k, labels == k
        if y[train].min() == y[train].max() or not test.any():
            log.warning("fold %d skipped: training part has a single outcome class", k)
            continue
        coefs = lasso_path(X[train], y[train], grid, unpenalized, tol=path_tol)
        eta = coefs[:, 0][:, None] + coefs[:, 1:] @ X[test].T
        total += np.array([binomial_deviance(e, y[test]) for e in eta])
        used += 1
    if used == 0:
        raise ValueError("every cross-validation fold was degenerate")
    return float(grid[int(np.argmin(total / used))])
