"""``jointrisk`` command line: simulate, table1, fit, predict, evaluate, figures."""
import argparse
import json
import logging
import os
import sys
import time

import numpy as np
import pandas as pd

from . import io
from .datagen import RHO_GRID, scenario_grid
from .metrics import evaluate_model
from .models import METHODS, GibbsConfig, check_method, fit_method
from .numerics.rng import RngStream
from .simulation import (
    DEFAULT_SEED,
    FIGURES,
    RESULT_COLUMNS,
    SimulationPlan,
    figure_tables,
    run_simulation,
    summarize,
    table1,
)

log = logging.getLogger("jointrisk")


class CliError(Exception):
    """Reported as ``jointrisk: error: ...`` with exit status 1."""


def _float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    for v in values:
        if not -1.0 < v < 1.0:
            raise argparse.ArgumentTypeError(f"rho must lie strictly inside (-1, 1), got {v}")
    return tuple(values)


def _method_list(text):
    names = [m.strip() for m in text.split(",") if m.strip()]
    if not names:
        raise argparse.ArgumentTypeError("empty method list")
    for m in names:
        try:
            check_method(m)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return tuple(names)


def _method(text):
    try:
        return check_method(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _fraction(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("hold-out fraction must lie in (0, 1)")
    return v


def _lambda_policy(text):
    if text == "cv":
        return text
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError("lambda must be non-negative")
    return v


def _gibbs(args):
    return GibbsConfig.fast() if args.fast_mpm else GibbsConfig()


def _write_csv(df, path):
    df.to_csv(path, index=False, lineterminator="\n", float_format="%.10g")


def _progress(done, total, elapsed):
    if done == total or done % 10 == 0:
        log.info("%d/%d tasks, %.0f s elapsed", done, total, elapsed)


def cmd_simulate(args):
    settings = ("base", "sensitivity") if args.sensitivity else ("base",)
    plan = SimulationPlan(
        scenarios=scenario_grid(settings, args.rho_list),
        iterations=args.iterations,
        methods=args.methods,
        base_seed=args.seed,
        gibbs=_gibbs(args),
        out_dir=args.out,
    )
    os.makedirs(args.out, exist_ok=True)
    start = time.time()
    results = run_simulation(plan, jobs=args.jobs, progress=_progress)
    _write_csv(results, os.path.join(args.out, "results.csv"))
    _write_csv(summarize(results), os.path.join(args.out, "summary.csv"))
    failed = int((results["status"] != "ok").sum())
    log.info("simulation finished in %.0f s", time.time() - start)
    if failed:
        log.warning("%d result rows carry an error status", failed)
    print(os.path.join(args.out, "results.csv"))


def cmd_table1(args):
    setting = "sensitivity" if args.sensitivity else "base"
    df = table1(seed=args.seed, iterations=args.iterations, n=args.n, rhos=args.rho_list, setting=setting)
    if args.out:
        _write_csv(df, args.out)
    else:
        print(df.to_string(index=False, float_format=lambda v: f"{v:.3f}"))


def _read(path, **kw):
    try:
        return io.read_dataset_csv(path, **kw)
    except FileNotFoundError:
        raise CliError(f"{path}: no such file") from None


def cmd_fit(args):
    data = _read(args.data)
    rng = RngStream(args.seed)
    model = fit_method(
        args.method, data.X, data.y1, data.y2, rng=rng, gibbs=_gibbs(args), lambda_policy=args.lam
    )
    io.save_model(args.out, model, data.covariates)
    print(args.out)


def cmd_predict(args):
    try:
        model, covariates = io.load_model(args.model)
    except FileNotFoundError:
        raise CliError(f"{args.model}: no such file") from None
    data = _read(args.data, require_outcomes=False)
    X = io.align_covariates(data, covariates, args.data)
    io.write_predictions_csv(args.out, model.predict(X))
    print(args.out)


def holdout_split(n, fraction, seed):
    """Indices ``(train, test)``; the test part holds ``round(fraction * n)`` rows."""
    perm = RngStream(seed).child("holdout").permutation(n)
    n_test = int(round(fraction * n))
    if n_test < 1 or n_test >= n:
        raise CliError(f"hold-out fraction {fraction} leaves an empty part with {n} rows")
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def cmd_evaluate(args):
    data = _read(args.data, require_truth=args.truth)
    extras = {}
    if args.holdout is not None:
        if args.predictions:
            raise CliError("--holdout fits its own model; drop --predictions")
        if not args.method:
            raise CliError("--holdout needs --method")
        train_idx, test_idx = holdout_split(len(data), args.holdout, args.seed)
        train, test = data.subset(train_idx), data.subset(test_idx)
        rng = RngStream(args.seed)
        model = fit_method(args.method, train.X, train.y1, train.y2, rng=rng, gibbs=_gibbs(args))
        preds = model.predict(test.X)
        extras = {"holdout": args.holdout, "seed": args.seed, "n_train": len(train), "n_test": len(test)}
        data, method = test, args.method
    else:
        if not args.predictions:
            raise CliError("give --predictions, or --holdout with --method")
        preds = io.read_predictions_csv(args.predictions)
        if len(preds) != len(data):
            raise CliError(
                f"{args.predictions} has {len(preds)} rows but {args.data} has {len(data)}; rows must align"
            )
        method = args.method or ""
    truth = data.truth if args.truth else None
    report = evaluate_model(preds, data.y1, data.y2, truth=truth, method=method)
    doc = report.to_dict()
    doc.update(extras)
    text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_figures(args):
    try:
        results = pd.read_csv(args.results)
    except FileNotFoundError:
        raise CliError(f"{args.results}: no such file") from None
    missing = [c for c in RESULT_COLUMNS if c not in results.columns]
    if missing:
        raise CliError(f"{args.results}: results columns missing: {missing}")
    os.makedirs(args.out, exist_ok=True)
    tables = figure_tables(results)
    for name, table in tables.items():
        _write_csv(table, os.path.join(args.out, f"{name}.csv"))
    if args.render:
        from .plots import render_figure

        for name, table in tables.items():
            metric = next(entry[0] for key, entry in FIGURES.items() if name.endswith(key))
            render_figure(table, metric, os.path.join(args.out, f"{name}.png"), title=name)
    print(args.out)


def build_parser():
    p = argparse.ArgumentParser(prog="jointrisk", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="progress and diagnostic logging")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the simulation study")
    s.add_argument("--iterations", type=_positive_int, default=100)
    s.add_argument("--rho-list", type=_float_list, default=RHO_GRID)
    s.add_argument("--methods", type=_method_list, default=METHODS, help="comma-separated subset of " + ",".join(METHODS))
    s.add_argument("--sensitivity", action="store_true", help="also run the low-prevalence scenarios")
    s.add_argument("--fast-mpm", action="store_true", help="2000 probit sweeps with 1000 burn-in")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--jobs", type=_positive_int, default=1)
    s.add_argument("--out", default="results")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("table1", help="outcome correlation and joint event rates per rho")
    t.add_argument("--iterations", type=_positive_int, default=100)
    t.add_argument("--n", type=_positive_int, default=5000)
    t.add_argument("--rho-list", type=_float_list, default=RHO_GRID)
    t.add_argument("--sensitivity", action="store_true", help="use the low-prevalence intercepts")
    t.add_argument("--seed", type=int, default=DEFAULT_SEED)
    t.add_argument("--out", help="CSV path (printed as a table when omitted)")
    t.set_defaults(func=cmd_table1)

    f = sub.add_parser("fit", help="fit one method to a dataset CSV")
    f.add_argument("data")
    f.add_argument("--method", type=_method, required=True)
    f.add_argument("--out", required=True, help="model JSON path")
    f.add_argument("--seed", type=int, default=0, help="seed for CV folds and the probit sampler")
    f.add_argument("--fast-mpm", action="store_true")
    f.add_argument("--lambda", dest="lam", type=_lambda_policy, default="cv", help="stacked-regression penalty: 'cv' or a number")
    f.set_defaults(func=cmd_fit)

    r = sub.add_parser("predict", help="joint and marginal risks from a saved model")
    r.add_argument("model")
    r.add_argument("data")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_predict)

    e = sub.add_parser("evaluate", help="calibration, AUC and MSE of predictions")
    e.add_argument("--data", required=True)
    e.add_argument("--predictions")
    e.add_argument("--truth", action="store_true", help="score MSE against the true_p* columns")
    e.add_argument("--holdout", type=_fraction, help="fit on the rest and evaluate on this fraction")
    e.add_argument("--method", type=_method)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--fast-mpm", action="store_true")
    e.add_argument("--out", help="JSON path (stdout when omitted)")
    e.set_defaults(func=cmd_evaluate)

    g = sub.add_parser("figures", help="figure-data tables from results.csv")
    g.add_argument("results")
    g.add_argument("--out", required=True)
    g.add_argument("--render", action="store_true", help="also draw a PNG per table (needs matplotlib)")
    g.set_defaults(func=cmd_figures)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except (CliError, io.SchemaError, ValueError, RuntimeError) as exc:
        print(f"jointrisk: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
