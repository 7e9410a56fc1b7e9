# plots.py
"""
SVG comparison plots: analytic curve vs simulated points with 95% error bars
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from macbench.errors import DomainError

# Fixed salt and no date metadata keep repeated runs byte-identical
matplotlib.rcParams["svg.hashsalt"] = "macbench"
matplotlib.rcParams["svg.fonttype"] = "path"

AXES = {
    # relation: (x analytic, x sim, y analytic, y sim, y ci columns, x label, y label)
    "t-vs-g": ("g", "g", "s_analytic", "s_sim_mean", ("s_sim_ci95_lo", "s_sim_ci95_hi"),
               "offered load G", "throughput S"),
    "d-vs-g": ("g", "g", "d_analytic", "d_sim_mean", ("d_sim_ci95_lo", "d_sim_ci95_hi"),
               "offered load G", "delay D (packet times)"),
    "d-vs-t": ("s_analytic", "s_sim_mean", "d_analytic", "d_sim_mean", ("d_sim_ci95_lo", "d_sim_ci95_hi"),
               "throughput S", "delay D (packet times)"),
}


def plot_relation(frame, relation, path):
    """Write one relation of a sweep table as an SVG file"""
    if relation not in AXES:
        raise DomainError(f"unknown relation {relation!r}")
    x_an, x_sim, y_an, y_sim, (ci_lo, ci_hi), x_label, y_label = AXES[relation]

    fig, ax = plt.subplots(figsize=(7, 5))
    for i, (technique, rows) in enumerate(frame.groupby("technique", sort=True)):
        color = f"C{i % 10}"

        analytic = rows[[x_an, y_an]].dropna().sort_values(x_an)
        if not analytic.empty:
            (line,) = ax.plot(analytic[x_an], analytic[y_an], "-", color=color, label=f"{technique} (analytic)")
            line.set_gid(f"analytic-{technique}")

        sim = rows[[x_sim, y_sim, ci_lo, ci_hi]].dropna(subset=[x_sim, y_sim])
        if not sim.empty:
            lower = np.clip(sim[y_sim] - sim[ci_lo], 0, None)
            upper = np.clip(sim[ci_hi] - sim[y_sim], 0, None)
            bars = ax.errorbar(
                sim[x_sim], sim[y_sim], yerr=[lower.fillna(0), upper.fillna(0)],
                fmt="o", color=color, markersize=4, capsize=2, label=f"{technique} (sim)",
            )
            bars.lines[0].set_gid(f"sim-{technique}")
            for collection in bars.lines[2]:
                collection.set_gid(f"sim-{technique}-ci")

    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.set_title(relation)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
