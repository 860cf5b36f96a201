import math

import numpy as np
import pytest
from scipy import special as sc
import statsmodels.api as sm

from jointrisk.metrics import (
    ALL_TARGETS,
    auc,
    evaluate_model,
    joint_calibration,
    marginal_citl,
    marginal_slope,
    mse,
)
from jointrisk.models.independent import fit_univariate_pair
from jointrisk.risk import JointRisk, product_joint


def draw_categories(joint, rng):
    cum = np.cumsum(joint.as_array(), axis=1)
    cell = (rng.random(len(joint))[:, None] > cum).sum(axis=1)  # 0:11 1:10 2:01 3:00
    return np.isin(cell, (0, 1)).astype(int), np.isin(cell, (0, 2)).astype(int)


def random_joint(n, rng, spread=1.0):
    eta = rng.normal(scale=spread, size=(n, 3)) + [-1.0, -0.5, -0.8]
    full = np.column_stack([eta, np.zeros(n)])
    return JointRisk.from_array(sc.softmax(full, axis=1))


def test_citl_of_event_rate_is_zero():
    y = np.r_[np.ones(30), np.zeros(70)]
    assert abs(marginal_citl(np.full(100, 0.3), y)) < 1e-8


def test_citl_of_near_perfect_predictions():
    y = np.tile([0, 1], 100)
    pred = np.where(y == 1, 0.999, 0.001)
    assert abs(marginal_citl(pred, y)) < 1e-9
    # with unequal classes the score equation 80 e^-a = 120 e^a gives a = log(2/3)/2
    # (up to terms of order 1e-6 from the smoothing)
    y = np.tile([0, 1, 1, 0, 0], 40)
    pred = np.where(y == 1, 0.999, 0.001)
    assert abs(marginal_citl(pred, y) - 0.5 * math.log(80 / 120)) < 1e-3


def test_citl_offset_identity():
    rng = np.random.default_rng(0)
    p = sc.expit(rng.normal(-1, 1, 20_000))
    y = (rng.random(20_000) < p).astype(int)
    halved = sc.expit(sc.logit(p) - math.log(2))
    shift = marginal_citl(halved, y) - marginal_citl(p, y)
    assert abs(shift - math.log(2)) < 1e-6


def test_citl_matches_glm_with_offset():
    rng = np.random.default_rng(1)
    p = sc.expit(rng.normal(-0.5, 1, 3000))
    y = (rng.random(3000) < sc.expit(sc.logit(p) + 0.3)).astype(int)
    ref = sm.GLM(y, np.ones(3000), family=sm.families.Binomial(), offset=sc.logit(p)).fit()
    assert abs(marginal_citl(p, y) - ref.params[0]) < 1e-7


def test_slope_self_consistency():
    rng = np.random.default_rng(2)
    p = sc.expit(rng.normal(-1, 1.2, 100_000))
    y = (rng.random(100_000) < p).astype(int)
    assert abs(marginal_slope(p, y) - 1.0) < 0.03


def test_slope_of_overfitted_predictions():
    rng = np.random.default_rng(3)
    lp = rng.normal(-1, 1.0, 100_000)
    y = (rng.random(100_000) < sc.expit(lp)).astype(int)
    assert abs(marginal_slope(sc.expit(2 * lp), y) - 0.5) < 0.02


def test_slope_matches_glm():
    rng = np.random.default_rng(4)
    p = sc.expit(rng.normal(-0.5, 1, 3000))
    y = (rng.random(3000) < p).astype(int)
    X = sm.add_constant(sc.logit(p))
    ref = sm.GLM(y, X, family=sm.families.Binomial()).fit()
    assert abs(marginal_slope(p, y) - ref.params[1]) < 1e-7


def test_slope_needs_varying_predictions():
    with pytest.raises(ValueError, match="constant"):
        marginal_slope(np.full(10, 0.3), np.tile([0, 1], 5))
    with pytest.raises(ValueError, match="single class"):
        marginal_citl(np.full(10, 0.3), np.zeros(10))


def test_joint_calibration_self_consistency():
    rng = np.random.default_rng(5)
    preds = random_joint(100_000, rng)
    y1, y2 = draw_categories(preds, rng)
    jc = joint_calibration(preds, y1, y2)
    assert np.all(np.abs(jc.citl) < 0.05)
    assert np.all(np.abs(jc.slope - 1) < 0.05)


def test_joint_intercept_offset_identity():
    rng = np.random.default_rng(6)
    preds = random_joint(20_000, rng)
    y1, y2 = draw_categories(preds, rng)
    c = 0.7
    arr = preds.as_array().copy()
    arr[:, 0] *= math.exp(c)  # log(P11/P00) shifted by +c
    arr /= arr.sum(axis=1, keepdims=True)
    before = joint_calibration(preds, y1, y2).citl
    after = joint_calibration(JointRisk.from_array(arr), y1, y2).citl
    assert abs((before[0] - after[0]) - c) < 1e-6
    assert np.allclose(before[1:], after[1:], atol=1e-6)


def test_joint_intercepts_match_generic_optimiser():
    rng = np.random.default_rng(7)
    preds = random_joint(4000, rng, spread=0.6)
    y1, y2 = draw_categories(preds, rng)
    # intercepts with unit slopes, refitted by a generic optimiser
    L = np.log(preds.as_array()[:, :3] / preds.as_array()[:, [3]])
    codes = np.select([(y1 == 1) & (y2 == 1), (y1 == 1) & (y2 == 0), (y1 == 0) & (y2 == 1)], [0, 1, 2], 3)

    def negll(a):
        eta = np.column_stack([L + a, np.zeros(len(codes))])
        return -np.sum(eta[np.arange(len(codes)), codes] - sc.logsumexp(eta, axis=1))

    from scipy.optimize import minimize

    ref = minimize(negll, np.zeros(3), method="BFGS", options={"gtol": 1e-10}).x
    assert np.max(np.abs(joint_calibration(preds, y1, y2).citl - ref)) < 1e-5


def test_product_predictions_underestimate_joint_risk(make_data):
    d = make_data(0.95, n=10_000)
    preds = fit_univariate_pair(d.X, d.y1, d.y2).predict(d.X)
    assert joint_calibration(preds, d.y1, d.y2).citl[0] > 0


def test_auc_cases():
    assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert auc([0.5] * 6, [0, 1, 0, 1, 1, 0]) == 0.5
    assert auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    with pytest.raises(ValueError):
        auc([0.1, 0.2], [1, 1])


def test_auc_against_pair_enumeration():
    rng = np.random.default_rng(8)
    s = rng.integers(0, 8, 300) / 8.0  # many ties
    y = rng.integers(0, 2, 300)
    pos, neg = s[y == 1], s[y == 0]
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    assert abs(auc(s, y) - wins / (pos.size * neg.size)) < 1e-12


def test_mse_cases():
    t = np.linspace(0.05, 0.95, 19)
    assert mse(t, t) == 0.0
    assert abs(mse(t + 0.1, t) - 0.01) < 1e-15
    assert abs(mse(np.full(19, 0.5), t) - sum((0.5 - v) ** 2 for v in t) / 19) < 1e-15
    with pytest.raises(ValueError, match="length"):
        mse(t[:3], t)


def test_report_schema_and_optional_mse(make_data):
    d = make_data(0.5, n=4000)
    preds = fit_univariate_pair(d.X, d.y1, d.y2).predict(d.X)
    with_truth = evaluate_model(preds, d.y1, d.y2, d.truth)
    without = evaluate_model(preds, d.y1, d.y2)
    assert set(with_truth.values) == set(ALL_TARGETS) == {"P11", "P10", "P01", "PY1", "PY2"}
    assert all(set(v) == {"citl", "slope", "auc", "mse"} for v in with_truth.values.values())
    assert all(set(v) == {"citl", "slope", "auc"} for v in without.values.values())
    assert len(list(with_truth.rows())) == 20
    doc = with_truth.to_dict()
    assert doc["metrics"]["PY1"]["mse"] == with_truth.values["PY1"]["mse"]


def test_truth_predictions_are_calibrated(make_data):
    d = make_data(0.75, n=50_000, seed=3)
    r = evaluate_model(d.truth.joint, d.y1, d.y2, d.truth)
    for t in ALL_TARGETS:
        assert abs(r.values[t]["citl"]) < 0.05
        assert abs(r.values[t]["slope"] - 1) < 0.05
        assert r.values[t]["mse"] == 0.0


def test_length_mismatch_rejected():
    preds = product_joint(np.full(5, 0.3), np.full(5, 0.4))
    with pytest.raises(ValueError, match="lengths"):
        evaluate_model(preds, [0, 1, 0, 1], [1, 0, 0, 1])
