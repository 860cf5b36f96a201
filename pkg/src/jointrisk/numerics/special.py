"""Special functions: the logistic link plus univariate and bivariate
standard normal distribution functions.

The bivariate CDF follows Genz's refinement of the Drezner-Wesolowsky
single-integral reduction, evaluated with Gauss-Legendre quadrature and
vectorised over arguments.
"""
import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special as sc

__all__ = [
    "expit",
    "logit",
    "std_normal_cdf",
    "std_normal_quantile",
    "bivariate_normal_cdf",
]

TWO_PI = 2.0 * math.pi


def expit(x):
    """Inverse logit, stable for large |x|.

    Negative arguments use exp(x)/(1+exp(x)) so the result stays positive
    down to the smallest subnormal (about x = -745).
    """
    x_arr = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(x_arr))
    out = np.where(x_arr >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return float(out) if out.ndim == 0 else out


def logit(p):
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0.0) | (p_arr >= 1.0)) or np.any(np.isnan(p_arr)):
        raise ValueError("logit is only defined on the open interval (0, 1)")
    return sc.logit(p)


def std_normal_cdf(x):
    return sc.ndtr(x)


def std_normal_quantile(p):
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0.0) | (p_arr >= 1.0)) or np.any(np.isnan(p_arr)):
        raise ValueError("normal quantile is only defined on the open interval (0, 1)")
    return sc.ndtri(p)


# Genz's quadrature orders (6 up to 20 nodes), chosen by |rho| band.
_GL = {n: leggauss(n) for n in (6, 12, 20)}


def _bvn_upper(h, k, r):
    """P(X > h, Y > k) for 1-d float arrays of finite h and k with |r| < 1."""
    out = np.empty_like(h)
    absr = np.abs(r)
    for lo, hi, order in ((0.0, 0.3, 6), (0.3, 0.75, 12), (0.75, 1.0, 20)):
        band = (absr >= lo) & (absr < hi)
        if not band.any():
            continue
        x, w = _GL[order]
        mid = band & (absr < 0.925)
        if mid.any():
            out[mid] = _bvn_upper_mid(h[mid], k[mid], r[mid], x, w)
        hi_corr = band & (absr >= 0.925)
        if hi_corr.any():
            out[hi_corr] = _bvn_upper_high(h[hi_corr], k[hi_corr], r[hi_corr], x, w)
    return out


def _bvn_upper_mid(h, k, r, x, w):
    hk = h * k
    hs = 0.5 * (h * h + k * k)
    asr = np.arcsin(r)
    # theta nodes on (0, asin r)
    sn = np.sin(np.outer(asr, 0.5 * (1.0 + x)))
    terms = np.exp((sn * hk[:, None] - hs[:, None]) / (1.0 - sn * sn))
    bvn = terms @ w * asr / (2.0 * TWO_PI)
    return bvn + sc.ndtr(-h) * sc.ndtr(-k)


def _bvn_upper_high(h, k, r, x, w):
    neg = r < 0
    k = np.where(neg, -k, k)
    hk = h * k
    a2 = (1.0 - r) * (1.0 + r)
    a = np.sqrt(a2)
    bs = (h - k) ** 2
    c = (4.0 - hk) / 8.0
    d = (12.0 - hk) / 16.0
    bvn = a * np.exp(-0.5 * (bs / a2 + hk)) * (
        1.0 - c * (bs - a2) * (1.0 - d * bs / 5.0) / 3.0 + c * d * a2 * a2 / 5.0
    )
    b = np.sqrt(bs)
    with np.errstate(over="ignore"):
        corr = (
            np.exp(-0.5 * hk)
            * math.sqrt(TWO_PI)
            * sc.ndtr(-b / a)
            * b
            * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
        )
    bvn = bvn - np.where(hk > -160.0, corr, 0.0)
    half = 0.5 * a
    xs = (half[:, None] * (x[None, :] + 1.0)) ** 2
    rs = np.sqrt(1.0 - xs)
    expo = -0.5 * (bs[:, None] / xs + hk[:, None])
    with np.errstate(over="ignore", invalid="ignore"):
        inner = np.exp(expo) * (
            np.exp(-hk[:, None] * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
            - (1.0 + c[:, None] * xs * (1.0 + d[:, None] * xs))
        )
    inner = np.where(expo > -100.0, inner, 0.0)
    bvn = bvn + half * (inner @ w)
    bvn = -bvn / TWO_PI
    pos_part = bvn + sc.ndtr(-np.maximum(h, k))
    neg_part = -bvn + np.where(k > h, sc.ndtr(k) - sc.ndtr(h), 0.0)
    return np.where(neg, neg_part, pos_part)


def bivariate_normal_cdf(a, b, rho):
    """P(Z1 <= a, Z2 <= b) for unit-variance normals with correlation ``rho``.

    Arguments broadcast; ``a`` and ``b`` may be +/- infinity.
    """
    a, b, rho = np.broadcast_arrays(
        np.asarray(a, dtype=float), np.asarray(b, dtype=float), np.asarray(rho, dtype=float)
    )
    if np.any(np.abs(rho) > 1.0) or np.any(np.isnan(rho)):
        raise ValueError("correlation must lie in [-1, 1]")
    shape = a.shape
    a, b, rho = a.ravel(), b.ravel(), rho.ravel()
    out = np.empty(a.shape, dtype=float)

    inf_a, inf_b = np.isinf(a), np.isinf(b)
    either_neg_inf = ((a == -np.inf) | (b == -np.inf))
    out[either_neg_inf] = 0.0
    only_b = (a == np.inf) & ~either_neg_inf
    out[only_b] = sc.ndtr(b[only_b])
    only_a = (b == np.inf) & ~either_neg_inf & ~inf_a
    out[only_a] = sc.ndtr(a[only_a])

    finite = ~(inf_a | inf_b)
    perfect_pos = finite & (rho == 1.0)
    out[perfect_pos] = sc.ndtr(np.minimum(a[perfect_pos], b[perfect_pos]))
    perfect_neg = finite & (rho == -1.0)
    out[perfect_neg] = np.maximum(
        0.0, sc.ndtr(a[perfect_neg]) + sc.ndtr(b[perfect_neg]) - 1.0
    )
    rest = finite & (np.abs(rho) < 1.0)
    if rest.any():
        # P(Z1 <= a, Z2 <= b) = P(-Z1 > -a, -Z2 > -b)
        out[rest] = _bvn_upper(-a[rest], -b[rest], rho[rest])
    out = np.clip(out, 0.0, 1.0)
    out = out.reshape(shape)
    return out[()] if out.ndim == 0 else out
