"""Damped Newton maximiser with backtracking line search."""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "OptimProblem",
    "OptimResult",
    "newton_maximize",
    "numerical_gradient",
    "numerical_hessian",
    "DIVERGENCE_BOUND",
]

# |coefficient| above this on the logit scale is reported as divergence (separation).
DIVERGENCE_BOUND = 30.0


@dataclass
class OptimProblem:
    dimension: int
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    # coordinates checked against DIVERGENCE_BOUND; None means all
    divergence_mask: Optional[np.ndarray] = None


@dataclass
class OptimResult:
    parameters: np.ndarray
    objective_value: float
    converged: bool
    iterations: int
    gradient_norm: float = np.nan
    diagnostics: dict = field(default_factory=dict)


def numerical_gradient(f, x, step=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def numerical_hessian(grad, x, step=1e-5):
    """Central differences of an analytic gradient, symmetrised."""
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.empty((n, n))
    for i in range(n):
        h = step * max(1.0, abs(x[i]))
        e = np.zeros(n)
        e[i] = h
        H[:, i] = (grad(x + e) - grad(x - e)) / (2 * h)
    return 0.5 * (H + H.T)


def _ascent_direction(H, g):
    """Newton direction for maximisation, ridge-damped until H is negative definite."""
    n = g.size
    ridge = 0.0
    scale = max(1e-8, np.max(np.abs(np.diag(H))))
    for _ in range(60):
        A = -H + ridge * np.eye(n)
        try:
            L = np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            ridge = max(2 * ridge, 1e-8 * scale)
            continue
        d = np.linalg.solve(L.T, np.linalg.solve(L, g))
        return d, ridge
    return g / scale, np.inf


def newton_maximize(problem, init, tol=1e-8, max_iter=200, max_halvings=50):
    """Maximise ``problem.objective`` starting from a feasible ``init``.

    Each accepted step does not decrease the objective. Steps landing on a
    non-finite objective (infeasible points) are halved like any other
    rejected step. When the Newton step cannot make progress a steepest
    ascent step is tried before giving up.
    """
    x = np.array(init, dtype=float)
    f = problem.objective(x)
    if not np.isfinite(f):
        raise ValueError("initial point is infeasible (non-finite objective)")
    hess = problem.hessian or (lambda z: numerical_hessian(problem.gradient, z))
    mask = problem.divergence_mask
    diagnostics = {"max_ridge": 0.0, "stalled": False, "diverged": False}
    it = 0
    g = problem.gradient(x)
    gnorm = float(np.max(np.abs(g))) if g.size else 0.0
    while gnorm > tol and it < max_iter:
        it += 1
        H = hess(x)
        d, ridge = _ascent_direction(H, g)
        diagnostics["max_ridge"] = max(diagnostics["max_ridge"], ridge)
        accepted = False
        for direction in (d, g / max(1.0, np.max(np.abs(g)))):
            t = 1.0
            for _ in range(max_halvings):
                x_new = x + t * direction
                f_new = problem.objective(x_new)
                if np.isfinite(f_new) and f_new >= f:
                    accepted = True
                    break
                t *= 0.5
            if accepted:
                break
        if not accepted:
            diagnostics["stalled"] = True
            break
        step = x_new - x
        x, f_old, f = x_new, f, f_new
        g = problem.gradient(x)
        gnorm = float(np.max(np.abs(g)))
        coords = x if mask is None else x[mask]
        if coords.size and np.max(np.abs(coords)) > DIVERGENCE_BOUND:
            diagnostics["diverged"] = True
            break
        if f - f_old <= 1e-15 * max(1.0, abs(f)) and np.max(np.abs(step)) < 1e-14:
            diagnostics["stalled"] = True
            break
    converged = gnorm <= tol and not diagnostics["diverged"]
    return OptimResult(x, float(f), converged, it, gnorm, diagnostics)
