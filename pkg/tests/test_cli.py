import json
import subprocess
import sys

import numpy as np
import pandas as pd
import pytest

from jointrisk import cli
from jointrisk.io import load_model, read_dataset_csv, read_predictions_csv, save_model
from jointrisk.models import METHODS, MultinomialModel, fit_method
from jointrisk.numerics.rng import RngStream


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def data_file(tmp_path_factory, make_data):
    path = tmp_path_factory.mktemp("cli") / "rho05.csv"
    make_data(0.5, n=3000).to_csv(path, include_truth=True)
    return path


@pytest.fixture(scope="module")
def strong_file(tmp_path_factory, make_data):
    path = tmp_path_factory.mktemp("cli") / "rho095.csv"
    make_data(0.95, n=6000, seed=4).to_csv(path, include_truth=True)
    return path


def test_fit_predict_roundtrip(tmp_path, data_file):
    model_path, pred_path = tmp_path / "m.json", tmp_path / "p.csv"
    assert run("fit", data_file, "--method", "mlr", "--out", model_path) == 0
    assert run("predict", model_path, data_file, "--out", pred_path) == 0
    table = read_dataset_csv(data_file)
    direct = fit_method("mlr", table.X, table.y1, table.y2).predict(table.X)
    from_file = read_predictions_csv(pred_path)
    assert np.max(np.abs(from_file.as_array() - direct.as_array())) <= 1e-12
    df = pd.read_csv(pred_path)
    assert list(df.columns) == ["p11", "p10", "p01", "p00", "py1", "py2"]
    assert np.max(np.abs(df.py1 - (df.p11 + df.p10))) < 1e-9
    assert np.max(np.abs(df.py2 - (df.p11 + df.p01))) < 1e-9
    assert np.max(np.abs(df[["p11", "p10", "p01", "p00"]].sum(axis=1) - 1)) < 1e-12


def test_fit_is_seeded(tmp_path, data_file):
    for name in ("a", "b"):
        run("fit", data_file, "--method", "sr", "--seed", 5, "--out", tmp_path / f"{name}.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_single_class_outcome_is_reported(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x1,x2,y1,y2\n" + "".join(f"{i},{-i},{i % 2},0\n" for i in range(20)))
    assert run("fit", bad, "--method", "univariate", "--out", tmp_path / "m.json") == 1
    err = capsys.readouterr().err
    assert "y2 has a single class" in err


def test_unknown_method_lists_the_tags(tmp_path, data_file, capsys):
    with pytest.raises(SystemExit) as exc:
        run("fit", data_file, "--method", "forest", "--out", tmp_path / "m.json")
    assert exc.value.code == 2
    err = capsys.readouterr().err
    for tag in METHODS:
        assert tag in err


def test_zero_model_predicts_uniform(tmp_path):
    save_model(tmp_path / "zero.json", MultinomialModel(np.zeros((3, 3))), ["x1", "x2"])
    (tmp_path / "x.csv").write_text("x1,x2\n0,0\n")
    run("predict", tmp_path / "zero.json", tmp_path / "x.csv", "--out", tmp_path / "p.csv")
    row = pd.read_csv(tmp_path / "p.csv").iloc[0].tolist()
    assert row == pytest.approx([0.25, 0.25, 0.25, 0.25, 0.5, 0.5], abs=1e-15)


def test_predict_schema_mismatch_names_column(tmp_path, capsys):
    save_model(tmp_path / "zero.json", MultinomialModel(np.zeros((3, 3))), ["x1", "x2"])
    (tmp_path / "x.csv").write_text("x1,age\n0,0\n")
    assert run("predict", tmp_path / "zero.json", tmp_path / "x.csv", "--out", tmp_path / "p.csv") == 1
    assert "'x2'" in capsys.readouterr().err


def test_truth_predictions_have_zero_mse(tmp_path, data_file):
    df = pd.read_csv(data_file)
    preds = df[["true_p11", "true_p10", "true_p01", "true_p00"]].to_numpy()
    pd.DataFrame(
        np.column_stack([preds, preds[:, 0] + preds[:, 1], preds[:, 0] + preds[:, 2]]),
        columns=["p11", "p10", "p01", "p00", "py1", "py2"],
    ).to_csv(tmp_path / "p.csv", index=False)
    run("evaluate", "--data", data_file, "--predictions", tmp_path / "p.csv", "--truth", "--out", tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    # marginal sums may differ from the stored truth in the last bit
    assert all(doc["metrics"][t]["mse"] < 1e-28 for t in ("P11", "P10", "P01", "PY1", "PY2"))


def test_product_predictions_underestimate_joint_risk(tmp_path, strong_file):
    run("fit", strong_file, "--method", "univariate", "--out", tmp_path / "m.json")
    run("predict", tmp_path / "m.json", strong_file, "--out", tmp_path / "p.csv")
    run("evaluate", "--data", strong_file, "--predictions", tmp_path / "p.csv", "--out", tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["metrics"]["P11"]["citl"] > 0
    assert "mse" not in doc["metrics"]["P11"]


def test_evaluate_errors(tmp_path, data_file, capsys):
    (tmp_path / "short.csv").write_text("p11,p10,p01,p00\n0.25,0.25,0.25,0.25\n")
    assert run("evaluate", "--data", data_file, "--predictions", tmp_path / "short.csv") == 1
    assert "rows must align" in capsys.readouterr().err
    (tmp_path / "plain.csv").write_text("x1,y1,y2\n1,1,0\n2,0,1\n")
    assert run("evaluate", "--data", tmp_path / "plain.csv", "--predictions", tmp_path / "short.csv", "--truth") == 1
    assert "truth columns" in capsys.readouterr().err
    assert run("evaluate", "--data", data_file) == 1
    assert run("evaluate", "--data", data_file, "--holdout", "0.3") == 1


def test_holdout_split_is_reproducible():
    a = cli.holdout_split(1000, 0.3, 7)
    b = cli.holdout_split(1000, 0.3, 7)
    c = cli.holdout_split(1000, 0.3, 8)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[1], c[1])
    train, test = a
    assert len(test) == 300 and len(train) == 700
    assert not set(train) & set(test)


def test_holdout_evaluation(tmp_path, data_file):
    for name in ("a", "b"):
        run("evaluate", "--data", data_file, "--holdout", "0.3", "--method", "pcc", "--seed", 3, "--truth", "--out", tmp_path / f"{name}.json")
    a = json.loads((tmp_path / "a.json").read_text())
    assert a == json.loads((tmp_path / "b.json").read_text())
    assert a["n_test"] == 900 and a["n_train"] == 2100 and a["method"] == "pcc"
    assert "mse" in a["metrics"]["PY2"]


def test_simulate_figures_and_determinism(tmp_path):
    args = ["simulate", "--iterations", 2, "--rho-list", "0,0.95", "--fast-mpm", "--methods", "univariate,mlr,mpm", "--seed", 11]
    run(*args, "--out", tmp_path / "a")
    run(*args, "--out", tmp_path / "b")
    for name in ("results.csv", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    results = pd.read_csv(tmp_path / "a" / "results.csv")
    assert list(results.columns) == ["scenario", "rho", "iteration", "method", "target", "metric", "value", "status"]
    assert len(results) == 2 * 2 * 3 * 20
    assert run("figures", tmp_path / "a" / "results.csv", "--out", tmp_path / "fig", "--render") == 0
    names = sorted(p.name for p in (tmp_path / "fig").iterdir())
    assert len(names) == 16 and "fig1_citl_joint.png" in names and "sfig4_mse_marginal.csv" in names


def test_figures_rejects_other_files(tmp_path, data_file, capsys):
    assert run("figures", data_file, "--out", tmp_path / "fig") == 1
    assert "results columns missing" in capsys.readouterr().err


def test_table1_and_bad_rho_list(tmp_path, capsys):
    run("table1", "--iterations", 2, "--n", 1000, "--out", tmp_path / "t.csv")
    df = pd.read_csv(tmp_path / "t.csv")
    assert list(df.rho) == [0.0, 0.25, 0.5, 0.75, 0.95]
    with pytest.raises(SystemExit):
        run("table1", "--rho-list", "0.5,1.2")
    assert "strictly inside" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "jointrisk", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("simulate", "table1", "fit", "predict", "evaluate", "figures"):
        assert cmd in out.stdout
