"""Optional PNG rendering of the figure-data tables (needs matplotlib)."""
import numpy as np

from .models import METHODS

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}

# reference line drawn on calibration panels
REFERENCE = {"citl": 0.0, "slope": 1.0}


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - exercised only without matplotlib
        raise RuntimeError("rendering needs matplotlib; install the 'plot' extra") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_figure(table, metric, path, title=None):
    """One row of panels (a panel per rho), targets side by side, methods as
    points with 2.5-97.5% interval bars."""
    plt = _pyplot()
    rhos = sorted(table["rho"].unique())
    targets = list(dict.fromkeys(table["target"]))
    methods = [m for m in METHODS if m in set(table["method"])]
    offsets = np.linspace(-0.3, 0.3, len(methods)) if len(methods) > 1 else np.zeros(1)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(rhos), figsize=(max(2.2 * len(rhos), 5.0), 3.0), sharey=True, squeeze=False)
        for ax, rho in zip(axes[0], rhos):
            part = table[table["rho"] == rho]
            for k, method in enumerate(methods):
                rows = part[part["method"] == method].set_index("target").reindex(targets)
                x = np.arange(len(targets)) + offsets[k]
                mean = rows["mean"].to_numpy()
                err = np.vstack([mean - rows["q2.5"].to_numpy(), rows["q97.5"].to_numpy() - mean])
                ax.errorbar(x, mean, yerr=err, fmt="o", ms=3, lw=0.8, capsize=1.5, label=method)
            if metric in REFERENCE:
                ax.axhline(REFERENCE[metric], color="0.5", lw=0.6, ls="--")
            ax.set_xticks(np.arange(len(targets)))
            ax.set_xticklabels(targets)
            ax.set_title(f"rho = {rho:g}")
        axes[0][0].set_ylabel(metric)
        handles, labels = axes[0][0].get_legend_handles_labels()
        fig.legend(handles, labels, loc="lower center", ncol=len(methods), frameon=False)
        if title:
            fig.suptitle(title)
        fig.tight_layout(rect=(0, 0.1, 1, 1))
        fig.savefig(path)
        plt.close(fig)
    return path
