"""Render convergence figures from the per-iteration CSV logs.

The CSV is the contract; this module is one consumer of it, producing
matplotlib figures next to the delimited output.
"""

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_csv_log(path):
    """Parse an emit_csv file back into a dict of columns."""
    columns = {"iter": [], "elapsed_s": [], "prox_count": [], "inner_iters": [],
               "rel_error": [], "objective": [], "prox_applied": []}
    with open(path, encoding="utf-8") as f:
        reader = csv.DictReader(f)
        for row in reader:
            columns["iter"].append(int(row["iter"]))
            columns["elapsed_s"].append(float(row["elapsed_s"]))
            columns["prox_count"].append(int(row["prox_count"]))
            columns["inner_iters"].append(int(row["inner_iters"]))
            columns["rel_error"].append(float(row["rel_error"]) if row["rel_error"] else None)
            columns["objective"].append(float(row["objective"]) if row["objective"] else None)
            columns["prox_applied"].append(row["prox_applied"] == "true")
    return columns


def _series(cols, xkey, ykey):
    xs, ys = [], []
    for x, y in zip(cols[xkey], cols[ykey]):
        if y is not None and y > 0:
            xs.append(x)
            ys.append(y)
    return xs, ys


def plot_convergence(runs, out_path, ykey="rel_error", title=None):
    """Semilogy convergence plot for one or more labeled runs.

    ``runs`` maps labels to either CSV column dicts or lists of RunRecord.
    """
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, data in runs.items():
        cols = data if isinstance(data, dict) else _records_to_columns(data)
        xs, ys = _series(cols, "iter", ykey)
        if xs:
            ax.semilogy(xs, ys, label=label, linewidth=1.2)
    ax.set_xlabel("iteration")
    ax.set_ylabel("relative error" if ykey == "rel_error" else ykey)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def _records_to_columns(records):
    return {
        "iter": [r.iteration for r in records],
        "elapsed_s": [r.elapsed_s for r in records],
        "prox_count": [r.prox_count for r in records],
        "inner_iters": [r.inner_iter_count for r in records],
        "rel_error": [r.l2_rel_error for r in records],
        "objective": [r.objective for r in records],
        "prox_applied": [r.prox_applied for r in records],
    }


def render_report(csv_paths, out_dir, labels=None):
    """Figures for a set of runs: error vs iteration, error vs time, objective.

    Returns the list of written figure paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    if labels is None:
        labels = [os.path.splitext(os.path.basename(p))[0] for p in csv_paths]
    runs = {label: read_csv_log(path) for label, path in zip(labels, csv_paths)}
    written = []

    for name, xkey, ykey, xlabel in (
        ("error_vs_iter.png", "iter", "rel_error", "iteration"),
        ("error_vs_time.png", "elapsed_s", "rel_error", "elapsed time (s)"),
        ("objective_vs_iter.png", "iter", "objective", "iteration"),
    ):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        plotted = False
        for label, cols in runs.items():
            xs, ys = _series(cols, xkey, ykey)
            if xs:
                ax.semilogy(xs, ys, label=label, linewidth=1.2)
                plotted = True
        if not plotted:
            plt.close(fig)
            continue
        ax.set_xlabel(xlabel)
        ax.set_ylabel("relative error" if ykey == "rel_error" else "objective")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = os.path.join(out_dir, name)
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
