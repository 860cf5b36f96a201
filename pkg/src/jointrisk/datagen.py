"""Synthetic correlated binary outcomes via a latent Gaussian copula.

Two covariates X1, X2 ~ N(0, 1). Latent (Z1, Z2) are standard bivariate
normal with correlation ``rho``; each is mapped to the logistic scale by
``eps = logit(Phi(Z))`` and ``Y_j = 1`` iff ``eps_j <= b0j + b1j*X1 + b2j*X2``.
Marginal risks are therefore exactly logistic in the linear predictor.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special as sc

from .numerics.rng import RngStream
from .numerics.special import bivariate_normal_cdf, expit
from .risk import JointRisk

__all__ = [
    "GenConfig",
    "SyntheticDataset",
    "SyntheticTruth",
    "generate_dataset",
    "true_joint_risk",
    "scenario_grid",
    "RHO_GRID",
    "DEV_N",
    "VAL_N",
]

RHO_GRID = (0.0, 0.25, 0.50, 0.75, 0.95)
DEV_N = 5000
VAL_N = 10000

BASE_BETA1 = (-1.0, math.log(2.0), 0.0)
BASE_BETA2 = (-1.5, 0.0, math.log(3.0))
SENSITIVITY_INTERCEPTS = (-3.0, -3.5)


@dataclass(frozen=True)
class GenConfig:
    n: int = DEV_N
    beta1: tuple = BASE_BETA1
    beta2: tuple = BASE_BETA2
    rho: float = 0.0
    seed: int = 0
    setting: str = "base"

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if len(self.beta1) != 3 or len(self.beta2) != 3:
            raise ValueError("beta1 and beta2 need (intercept, X1, X2) coefficients")

    @property
    def tag(self):
        return f"{self.setting}-rho{self.rho:.2f}"

    def validation_twin(self):
        return replace(self, n=VAL_N)

    def linear_predictors(self, X):
        b1, b2 = np.asarray(self.beta1), np.asarray(self.beta2)
        return b1[0] + X @ b1[1:], b2[0] + X @ b2[1:]


@dataclass
class SyntheticTruth:
    """Data-generating joint and marginal risks, one entry per row."""

    joint: JointRisk

    @property
    def marginal1(self):
        return self.joint.marginal1

    @property
    def marginal2(self):
        return self.joint.marginal2


@dataclass
class SyntheticDataset:
    X: np.ndarray
    Y: np.ndarray
    truth: SyntheticTruth = None
    config: GenConfig = field(default=None, repr=False)

    @property
    def y1(self):
        return self.Y[:, 0]

    @property
    def y2(self):
        return self.Y[:, 1]

    def __len__(self):
        return self.X.shape[0]

    def to_csv(self, path, include_truth=False):
        from .io import write_dataset_csv

        if include_truth and self.truth is None:
            raise ValueError("dataset carries no truth to export")
        write_dataset_csv(path, self.X, self.Y, self.truth.joint if include_truth else None)


def true_joint_risk(lp1, lp2, rho):
    """Joint outcome risk implied by the latent mechanism at given linear predictors.

    Y_j = 1 iff Z_j <= Phi^{-1}(expit(lp_j)), so P(Y1=1, Y2=1) is a bivariate
    normal orthant probability.
    """
    m1 = expit(np.asarray(lp1, dtype=float))
    m2 = expit(np.asarray(lp2, dtype=float))
    with np.errstate(divide="ignore"):
        t1, t2 = sc.ndtri(m1), sc.ndtri(m2)
    p11 = bivariate_normal_cdf(t1, t2, rho)
    p11 = np.minimum(np.minimum(p11, m1), m2)
    p11 = np.maximum(p11, np.maximum(0.0, m1 + m2 - 1.0))
    p10 = m1 - p11
    p01 = m2 - p11
    p00 = 1.0 - p11 - p10 - p01
    return JointRisk(p11, p10, p01, p00)


def generate_dataset(config, rng=None):
    rng = RngStream(config.seed) if rng is None else rng
    gen = rng.generator
    n = config.n
    X = gen.standard_normal((n, 2))
    e = gen.standard_normal((n, 2))
    r = config.rho
    z1 = e[:, 0]
    z2 = r * e[:, 0] + math.sqrt(1.0 - r * r) * e[:, 1]
    with np.errstate(divide="ignore"):
        eps1 = sc.logit(sc.ndtr(z1))
        eps2 = sc.logit(sc.ndtr(z2))
    lp1, lp2 = config.linear_predictors(X)
    Y = np.column_stack([eps1 <= lp1, eps2 <= lp2]).astype(np.int8)
    truth = SyntheticTruth(true_joint_risk(lp1, lp2, r))
    return SyntheticDataset(X=X, Y=Y, truth=truth, config=config)


def scenario_grid(settings=("base", "sensitivity"), rhos=RHO_GRID):
    """Development-set configurations (n=5000); use ``validation_twin`` for n=10000."""
    out = []
    for setting in settings:
        if setting == "base":
            b1, b2 = BASE_BETA1, BASE_BETA2
        elif setting == "sensitivity":
            b1 = (SENSITIVITY_INTERCEPTS[0],) + BASE_BETA1[1:]
            b2 = (SENSITIVITY_INTERCEPTS[1],) + BASE_BETA2[1:]
        else:
            raise ValueError(f"unknown scenario setting {setting!r}")
        out.extend(GenConfig(n=DEV_N, beta1=b1, beta2=b2, rho=float(r), setting=setting) for r in rhos)
    return out
