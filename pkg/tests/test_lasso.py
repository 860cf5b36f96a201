import cvxpy as cp
import numpy as np
import pytest

from jointrisk.numerics.logistic import (
    cv_select_lambda,
    fit_logistic,
    lambda_grid,
    lambda_max,
    lasso_logistic,
    lasso_path,
    stratified_folds,
)
from jointrisk.numerics.rng import RngStream


def make(n=800, p=4, seed=0, coef=(0.8, -0.5, 0.0, 0.3)):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    eta = -0.7 + X @ np.asarray(coef[:p])
    y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(float)
    return X, y


def convex_oracle(X, y, lam, unpenalized=()):
    """Same objective handed to a generic conic solver."""
    n, p = X.shape
    b0 = cp.Variable()
    b = cp.Variable(p)
    eta = b0 + X @ b
    pen = np.ones(p)
    pen[list(unpenalized)] = 0.0
    loss = cp.sum(cp.logistic(eta) - cp.multiply(y, eta)) / n
    cp.Problem(cp.Minimize(loss + lam * cp.sum(cp.multiply(pen, cp.abs(b))))).solve(solver="CLARABEL")
    return np.concatenate([[b0.value], b.value])


def test_zero_penalty_equals_newton_fit():
    X, y = make()
    D = np.column_stack([np.ones(len(y)), X])
    mle = fit_logistic(D, y, tol=1e-12).parameters
    assert np.max(np.abs(lasso_logistic(X, y, 0.0) - mle)) < 1e-5


@pytest.mark.parametrize("frac", [0.5, 0.1, 0.02])
def test_matches_conic_solver(frac):
    X, y = make(seed=1)
    lam = frac * lambda_max(X, y)
    ours = lasso_logistic(X, y, lam)
    assert np.max(np.abs(ours - convex_oracle(X, y, lam))) < 1e-4


def test_unpenalized_columns_match_conic_solver():
    X, y = make(seed=2)
    lam = 0.3 * lambda_max(X, y)
    ours = lasso_logistic(X, y, lam, unpenalized=(0,))
    assert np.max(np.abs(ours - convex_oracle(X, y, lam, unpenalized=(0,)))) < 1e-4
    assert ours[1] != 0.0


def test_lambda_max_zeroes_everything():
    X, y = make(seed=3)
    top = lambda_max(X, y)
    for lam in (top, 1.5 * top):
        coef = lasso_logistic(X, y, lam)
        assert np.all(coef[1:] == 0.0)
        assert abs(coef[0] - np.log(y.mean() / (1 - y.mean()))) < 1e-8
    # just below the threshold something enters
    assert np.any(lasso_logistic(X, y, 0.95 * top)[1:] != 0.0)


def test_path_l1_norm_monotone():
    X, y = make(seed=4)
    grid = lambda_grid(X, y, 30)
    assert np.all(np.diff(grid) < 0)
    assert grid[0] == pytest.approx(lambda_max(X, y))
    assert grid[-1] == pytest.approx(1e-4 * lambda_max(X, y))
    coefs = lasso_path(X, y, grid)
    norms = np.abs(coefs[:, 1:]).sum(axis=1)
    assert np.all(np.diff(norms) >= -1e-8)


def test_duplicated_column_leaves_fit_unchanged():
    X, y = make(seed=5)
    lam = 0.05 * lambda_max(X, y)
    base = lasso_logistic(X, y, lam)
    dup = lasso_logistic(np.column_stack([X[:, :1], X]), y, lam, tol=1e-12)
    p_base = 1 / (1 + np.exp(-(base[0] + X @ base[1:])))
    Xd = np.column_stack([X[:, :1], X])
    p_dup = 1 / (1 + np.exp(-(dup[0] + Xd @ dup[1:])))
    assert np.max(np.abs(p_base - p_dup)) < 1e-4
    assert dup[1] + dup[2] == pytest.approx(base[1], abs=1e-4)


def test_negative_lambda_rejected():
    X, y = make(n=50)
    with pytest.raises(ValueError):
        lasso_logistic(X, y, -0.1)


def test_stratified_folds_balance_classes():
    y = np.r_[np.ones(103), np.zeros(397)]
    labels = stratified_folds(y, 10, RngStream(1).generator)
    for k in range(10):
        pos = np.sum((labels == k) & (y == 1))
        assert 10 <= pos <= 11
        assert 49 <= np.sum(labels == k) <= 51


def test_cv_single_value_grid():
    X, y = make(n=100)
    assert cv_select_lambda(X, y, 10, [0.123], RngStream(0).generator) == 0.123


def test_cv_is_deterministic():
    X, y = make(n=600, seed=6)
    grid = lambda_grid(X, y, 15)
    a = cv_select_lambda(X, y, 10, grid, RngStream(7).child("cv").generator)
    b = cv_select_lambda(X, y, 10, grid, RngStream(7).child("cv").generator)
    assert a == b


def test_cv_shrinks_pure_noise():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((2000, 5))
    y = (rng.random(2000) < 0.3).astype(float)
    grid = lambda_grid(X, y, 50)
    lam = cv_select_lambda(X, y, 10, grid, RngStream(8).generator)
    coef = lasso_logistic(X, y, lam)
    assert np.all(np.abs(coef[1:]) < 0.05)


def test_cv_rejects_bad_grids():
    X, y = make(n=100)
    gen = RngStream(0).generator
    with pytest.raises(ValueError):
        cv_select_lambda(X, y, 10, [], gen)
    with pytest.raises(ValueError):
        cv_select_lambda(X, y, 10, [0.01, 0.1], gen)
    with pytest.raises(ValueError):
        cv_select_lambda(X, y, 1, [0.1, 0.01], gen)
