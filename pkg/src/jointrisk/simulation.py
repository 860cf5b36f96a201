"""Simulation study driver: repeated development/validation draws per
scenario, every method fitted and scored on the validation set."""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .datagen import DEV_N, RHO_GRID, GenConfig, generate_dataset, scenario_grid
from .metrics import ALL_TARGETS, METRICS, evaluate_model
from .models import METHODS, GibbsConfig, check_method, fit_method
from .numerics.rng import RngStream
from .risk import MARGINAL_TARGETS, TARGETS

__all__ = [
    "SimulationPlan",
    "run_iteration",
    "run_simulation",
    "summarize",
    "table1",
    "figure_tables",
    "RESULT_COLUMNS",
    "SUMMARY_COLUMNS",
    "FIGURE_COLUMNS",
]

log = logging.getLogger(__name__)

RESULT_COLUMNS = ["scenario", "rho", "iteration", "method", "target", "metric", "value", "status"]
SUMMARY_COLUMNS = ["scenario", "rho", "method", "target", "metric", "n", "mean", "sd", "q2.5", "q97.5"]
FIGURE_COLUMNS = ["rho", "method", "target", "mean", "q2.5", "q97.5"]
DEFAULT_SEED = 20200101

FIGURES = {
    "fig1_citl_joint": ("citl", TARGETS),
    "fig2_slope_joint": ("slope", TARGETS),
    "fig3_auc_joint": ("auc", TARGETS),
    "fig4_mse_joint": ("mse", TARGETS),
    "sfig1_citl_marginal": ("citl", MARGINAL_TARGETS),
    "sfig2_slope_marginal": ("slope", MARGINAL_TARGETS),
    "sfig3_auc_marginal": ("auc", MARGINAL_TARGETS),
    "sfig4_mse_marginal": ("mse", MARGINAL_TARGETS),
}


@dataclass
class SimulationPlan:
    scenarios: list = field(default_factory=lambda: scenario_grid(("base",)))
    iterations: int = 100
    methods: tuple = METHODS
    base_seed: int = DEFAULT_SEED
    gibbs: GibbsConfig = field(default_factory=GibbsConfig)
    out_dir: str = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if not self.methods:
            raise ValueError("method set is empty")
        for m in self.methods:
            check_method(m)
        tags = [s.tag for s in self.scenarios]
        if len(set(tags)) != len(tags):
            raise ValueError("scenario tags must be unique")


def _failure_rows(scenario, iteration, method, message):
    status = "error: " + " ".join(message.split())
    return [
        (scenario.tag, scenario.rho, iteration, method, t, m, np.nan, status)
        for t in ALL_TARGETS
        for m in METRICS
    ]


def run_iteration(scenario, iteration, methods=METHODS, base_seed=DEFAULT_SEED, gibbs=None):
    """All requested methods for one (scenario, iteration); returns result tuples.

    Data streams depend only on (base_seed, scenario tag, iteration), so the
    method set never changes the generated data.
    """
    root = RngStream(base_seed).child(scenario.tag).child(iteration)
    dev = generate_dataset(scenario, root.child("dev-data"))
    val = generate_dataset(scenario.validation_twin(), root.child("val-data"))
    rows = []
    for method in methods:
        try:
            model = fit_method(method, dev.X, dev.y1, dev.y2, rng=root.child(method), gibbs=gibbs)
            report = evaluate_model(model.predict(val.X), val.y1, val.y2, val.truth)
        except Exception as exc:  # one failing fit must not sink the iteration
            log.warning("%s iteration %d %s failed: %s", scenario.tag, iteration, method, exc)
            rows.extend(_failure_rows(scenario, iteration, method, f"{type(exc).__name__}: {exc}"))
            continue
        for target, metric, value in report.rows():
            rows.append((scenario.tag, scenario.rho, iteration, method, target, metric, float(value), "ok"))
    return rows


def _task(args):
    return run_iteration(*args)


def _sort_results(df, plan):
    order = {
        "scenario": [s.tag for s in plan.scenarios],
        "method": list(METHODS),
        "target": list(ALL_TARGETS),
        "metric": list(METRICS),
    }
    df = df.copy()
    for col, cats in order.items():
        df[col] = pd.Categorical(df[col], categories=cats, ordered=True)
    df = df.sort_values(["scenario", "iteration", "method", "target", "metric"], kind="mergesort")
    for col in order:
        df[col] = df[col].astype(str)
    return df.reset_index(drop=True)


def run_simulation(plan, jobs=1, progress=None):
    """Run the plan; returns the long-format results DataFrame (sorted by key)."""
    tasks = [
        (scenario, it, tuple(plan.methods), plan.base_seed, plan.gibbs)
        for scenario in plan.scenarios
        for it in range(plan.iterations)
    ]
    rows = []
    start = time.time()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for k, chunk in enumerate(pool.map(_task, tasks)):
                rows.extend(chunk)
                if progress:
                    progress(k + 1, len(tasks), time.time() - start)
    else:
        for k, task in enumerate(tasks):
            rows.extend(_task(task))
            if progress:
                progress(k + 1, len(tasks), time.time() - start)
    df = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    return _sort_results(df, plan)


def _q(p):
    def f(x):
        return float(np.percentile(x, p)) if len(x) else np.nan

    f.__name__ = f"q{p}"
    return f


def summarize(results):
    """Mean and spread (sd, 2.5/97.5% quantiles) over iterations of every successful metric."""
    ok = results[results["status"] == "ok"]
    keys = ["scenario", "rho", "method", "target", "metric"]
    g = ok.groupby(keys, sort=False)["value"]
    out = g.agg(n="count", mean="mean", sd="std").reset_index()
    out["q2.5"] = g.agg(_q(2.5)).to_numpy()
    out["q97.5"] = g.agg(_q(97.5)).to_numpy()
    return out[SUMMARY_COLUMNS]


def figure_tables(results):
    """Plot-ready aggregates, one table per figure and scenario setting.

    Keys are the figure names (``fig1_citl_joint`` ...) for the base setting
    and ``<setting>_<figure>`` for any other setting present.
    """
    ok = results[results["status"] == "ok"].copy()
    ok["setting"] = ok["scenario"].str.split("-rho").str[0]
    tables = {}
    for setting in pd.unique(ok["setting"]):
        part = ok[ok["setting"] == setting]
        prefix = "" if setting == "base" else f"{setting}_"
        for name, (metric, targets) in FIGURES.items():
            sel = part[(part["metric"] == metric) & (part["target"].isin(targets))]
            g = sel.groupby(["rho", "method", "target"], sort=False)["value"]
            agg = g.agg(mean="mean").reset_index()
            agg["q2.5"] = g.agg(_q(2.5)).to_numpy()
            agg["q97.5"] = g.agg(_q(97.5)).to_numpy()
            for col, cats in (("method", list(METHODS)), ("target", list(targets))):
                agg[col] = pd.Categorical(agg[col], categories=cats, ordered=True)
            agg = agg.sort_values(["rho", "method", "target"], kind="mergesort")
            for col in ("method", "target"):
                agg[col] = agg[col].astype(str)
            tables[prefix + name] = agg[FIGURE_COLUMNS].reset_index(drop=True)
    return tables


def table1(seed=DEFAULT_SEED, iterations=100, n=DEV_N, rhos=RHO_GRID, setting="base"):
    """Pooled phi coefficient and observed joint event rates per rho."""
    rows = []
    for cfg in scenario_grid((setting,), rhos):
        cfg = GenConfig(n=n, beta1=cfg.beta1, beta2=cfg.beta2, rho=cfg.rho, setting=setting)
        root = RngStream(seed).child("table1").child(cfg.tag)
        counts = np.zeros(4)
        for it in range(iterations):
            d = generate_dataset(cfg, root.child(it))
            y1, y2 = d.y1.astype(bool), d.y2.astype(bool)
            counts += [np.sum(y1 & y2), np.sum(y1 & ~y2), np.sum(~y1 & y2), np.sum(~y1 & ~y2)]
        total = counts.sum()
        p11, p10, p01, p00 = counts / total
        py1, py2 = p11 + p10, p11 + p01
        denom = np.sqrt(py1 * (1 - py1) * py2 * (1 - py2))
        corr = (p11 * p00 - p10 * p01) / denom if denom > 0 else np.nan
        rows.append((cfg.rho, corr, p11, p10, p01, py1, py2))
    return pd.DataFrame(rows, columns=["rho", "corr", "p11", "p10", "p01", "py1", "py2"])
