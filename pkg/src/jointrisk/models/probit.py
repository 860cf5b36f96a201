"""Bayesian bivariate probit regression fitted by data-augmentation Gibbs sampling.

Latent Z_ij = lp_ij + eps_ij with (eps_i1, eps_i2) standard bivariate normal
with correlation rho, and Y_ij = 1 iff Z_ij > 0. Each sweep updates
Z1, Z2 (truncated conditional normals), beta1, beta2 (Gaussian full
conditionals under independent N(0, prior_variance) priors) and rho
(random-walk Metropolis with reflection at the prior support).
"""
import math
from dataclasses import dataclass, field

import numpy as np

from ..numerics.rng import RngStream, sample_sign_truncated
from ..numerics.special import bivariate_normal_cdf
from ..risk import JointRisk
from .independent import _as_matrix, check_binary

__all__ = ["GibbsConfig", "ProbitPosterior", "fit_probit", "predict_probit", "DegenerateChainError"]


class DegenerateChainError(RuntimeError):
    pass


@dataclass(frozen=True)
class GibbsConfig:
    total_samples: int = 10_000
    burn_in: int = 5_000
    proposal_scale: float = 0.05
    seed: int = 0
    prior_variance: float = 10.0
    positive_rho: bool = False
    stall_limit: int = 500

    def __post_init__(self):
        if self.burn_in < 0 or self.burn_in >= self.total_samples:
            raise ValueError("burn_in must be in [0, total_samples)")
        if self.prior_variance <= 0:
            raise ValueError("prior_variance must be positive")

    @classmethod
    def fast(cls, seed=0):
        """Reduced budget for desk-scale simulation runs."""
        return cls(total_samples=2_000, burn_in=1_000, seed=seed)


@dataclass
class ProbitPosterior:
    method = "mpm"
    draws: dict
    summary: dict
    diagnostics: dict = field(default_factory=dict)
    use_draw_average: bool = False

    @property
    def beta1(self):
        return np.asarray(self.summary["beta1_mean"])

    @property
    def beta2(self):
        return np.asarray(self.summary["beta2_mean"])

    @property
    def rho(self):
        return float(self.summary["rho_mean"])

    def predict(self, X):
        return predict_probit(self, X, draw_average=self.use_draw_average)

    def to_dict(self):
        return {
            "summary": {k: np.asarray(v).tolist() for k, v in self.summary.items()},
            "diagnostics": self.diagnostics,
            "draws": {k: np.asarray(v).tolist() for k, v in self.draws.items()},
        }

    @classmethod
    def from_dict(cls, d):
        summary = {k: (np.asarray(v) if isinstance(v, list) else v) for k, v in d["summary"].items()}
        draws = {k: np.asarray(v, dtype=float) for k, v in d.get("draws", {}).items()}
        return cls(draws, summary, dict(d.get("diagnostics", {})))


def _reflect(r, lo, hi):
    width = hi - lo
    while r < lo or r > hi:
        r = 2 * lo - r if r < lo else 2 * hi - r
        if width <= 0:
            break
    return r


def _rho_logpost(r, n, s11, s12, s22):
    one_m = 1.0 - r * r
    return -0.5 * n * math.log(one_m) - (s11 - 2.0 * r * s12 + s22) / (2.0 * one_m)


def _draw_beta(D, DtD, target, resid_var, prior_prec, gen):
    Q = DtD / resid_var + prior_prec
    L = np.linalg.cholesky(Q)
    rhs = D.T @ target / resid_var
    mean = np.linalg.solve(L.T, np.linalg.solve(L, rhs))
    return mean + np.linalg.solve(L.T, gen.standard_normal(mean.size))


def fit_probit(X, y1, y2, cfg=None, rng=None):
    cfg = GibbsConfig() if cfg is None else cfg
    if not cfg.proposal_scale > 0:
        raise DegenerateChainError(
            "rho proposal scale must be positive; a zero scale never moves the chain"
        )
    X = _as_matrix(X)
    y1 = check_binary(y1, "y1")
    y2 = check_binary(y2, "y2")
    gen = (RngStream(cfg.seed) if rng is None else rng).generator
    n = X.shape[0]
    D = np.column_stack([np.ones(n), X])
    width = D.shape[1]
    DtD = D.T @ D
    prior_prec = np.eye(width) / cfg.prior_variance
    pos1, pos2 = y1 > 0, y2 > 0
    lo_rho, hi_rho = (0.0, 1.0) if cfg.positive_rho else (-1.0, 1.0)

    b1 = np.zeros(width)
    b2 = np.zeros(width)
    rho = 0.5 * (lo_rho + hi_rho)
    lp1 = D @ b1
    lp2 = D @ b2
    z1 = sample_sign_truncated(lp1, np.ones(n), pos1, gen)
    z2 = sample_sign_truncated(lp2, np.ones(n), pos2, gen)

    keep = cfg.total_samples - cfg.burn_in
    out_b1 = np.empty((keep, width))
    out_b2 = np.empty((keep, width))
    out_rho = np.empty(keep)
    accepted = 0
    accepted_kept = 0
    stall = 0

    for it in range(cfg.total_samples):
        sd = math.sqrt(1.0 - rho * rho)
        sd_vec = np.full(n, sd)
        z1 = sample_sign_truncated(lp1 + rho * (z2 - lp2), sd_vec, pos1, gen)
        z2 = sample_sign_truncated(lp2 + rho * (z1 - lp1), sd_vec, pos2, gen)
        resid_var = sd * sd
        b1 = _draw_beta(D, DtD, z1 - rho * (z2 - lp2), resid_var, prior_prec, gen)
        lp1 = D @ b1
        b2 = _draw_beta(D, DtD, z2 - rho * (z1 - lp1), resid_var, prior_prec, gen)
        lp2 = D @ b2

        e1 = z1 - lp1
        e2 = z2 - lp2
        s11, s12, s22 = float(e1 @ e1), float(e1 @ e2), float(e2 @ e2)
        prop = _reflect(rho + cfg.proposal_scale * gen.standard_normal(), lo_rho, hi_rho)
        moved = False
        if abs(prop) < 1.0:
            log_ratio = _rho_logpost(prop, n, s11, s12, s22) - _rho_logpost(rho, n, s11, s12, s22)
            if math.log(gen.random()) < log_ratio:
                rho = prop
                moved = True
        if moved:
            accepted += 1
            stall = 0
        else:
            stall += 1
            if stall >= cfg.stall_limit:
                raise DegenerateChainError(
                    f"rho proposal rejected {stall} times in a row at sweep {it}; "
                    f"reduce proposal_scale (currently {cfg.proposal_scale})"
                )
        if it >= cfg.burn_in:
            k = it - cfg.burn_in
            out_b1[k] = b1
            out_b2[k] = b2
            out_rho[k] = rho
            accepted_kept += moved

    draws = {"beta1": out_b1, "beta2": out_b2, "rho": out_rho}
    summary = {
        "beta1_mean": out_b1.mean(axis=0),
        "beta2_mean": out_b2.mean(axis=0),
        "rho_mean": float(out_rho.mean()),
        "beta1_sd": out_b1.std(axis=0, ddof=1),
        "beta2_sd": out_b2.std(axis=0, ddof=1),
        "rho_sd": float(out_rho.std(ddof=1)),
    }
    diagnostics = {
        "rho_acceptance": accepted / cfg.total_samples,
        "rho_acceptance_retained": accepted_kept / keep,
        "retained": keep,
        "burn_in": cfg.burn_in,
        "total_samples": cfg.total_samples,
    }
    return ProbitPosterior(draws, summary, diagnostics)


def probit_joint(lp1, lp2, rho):
    p11 = bivariate_normal_cdf(lp1, lp2, rho)
    p10 = bivariate_normal_cdf(lp1, -lp2, -rho)
    p01 = bivariate_normal_cdf(-lp1, lp2, -rho)
    p00 = 1.0 - p11 - p10 - p01
    return JointRisk(p11, p10, p01, np.maximum(p00, 0.0))


def predict_probit(p, X, draw_average=False):
    """Orthant probabilities at posterior-mean parameters, or averaged over
    retained draws when ``draw_average`` is set."""
    X = _as_matrix(X)
    D = np.column_stack([np.ones(X.shape[0]), X])
    if not draw_average:
        return probit_joint(D @ p.beta1, D @ p.beta2, p.rho)
    b1, b2, rho = p.draws["beta1"], p.draws["beta2"], p.draws["rho"]
    acc = np.zeros((X.shape[0], 4))
    for k in range(rho.size):
        acc += probit_joint(D @ b1[k], D @ b2[k], rho[k]).as_array()
    return JointRisk.from_array(acc / rho.size)
