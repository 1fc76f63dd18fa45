"""Figure rendering for the report path.

Every CLI report command drops a PNG next to its CSV output: a
convergence curve for ``solve`` and a per-seed final-fitness chart for
``compare``.  matplotlib is imported lazily with the Agg backend so the
solver itself stays headless-safe and light to import.
"""

from __future__ import annotations

from .bench import median_by_algorithm

__all__ = ["save_trace_figure", "save_compare_figure"]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_trace_figure(trace, path, title=None):
    """Convergence curve: population best and global best per generation."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(trace.generations, trace.best_lde, lw=0.8, alpha=0.6,
            color="tab:gray", label="population best")
    ax.plot(trace.generations, trace.global_best_lde, lw=1.6,
            color="tab:blue", label="global best")
    for gen, event in zip(trace.generations, trace.events):
        if "restart" in event:
            ax.axvline(gen, color="tab:red", lw=0.5, alpha=0.3)
        if "twin_removal" in event:
            ax.axvline(gen, color="tab:green", lw=0.5, alpha=0.3)
    if min(trace.global_best_lde) > 0:
        ax.set_yscale("log")
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness (LDE)")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_compare_figure(rows, path, title=None):
    """Final LDE per seed for each algorithm, with the median marked."""
    plt = _pyplot()
    medians = median_by_algorithm(rows)
    algorithms = list(medians)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for k, alg in enumerate(algorithms):
        values = [r.final_lde for r in rows if r.algorithm == alg]
        ax.scatter([k] * len(values), values, alpha=0.6, label=f"{alg} runs")
        ax.hlines(medians[alg], k - 0.25, k + 0.25, color="black", lw=2)
    ax.set_xticks(range(len(algorithms)), algorithms)
    ax.set_ylabel("final fitness (LDE)")
    if all(r.final_lde > 0 for r in rows):
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
