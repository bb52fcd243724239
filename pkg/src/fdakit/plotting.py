"""SVG curve plots for the CLI.

Output is byte-reproducible for identical inputs: the SVG hash salt is
pinned and the creation date is stripped from the metadata.
"""

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "fdakit"

import matplotlib.pyplot as plt
import numpy as np

# Inside/outside coloring for scan plots; cycling palette otherwise.
SCAN_COLORS = {0: "#9a9a9a", 1: "#d62728"}
_PALETTE = plt.get_cmap("tab10").colors


def plot_curves_svg(path, grid_points: np.ndarray, values: np.ndarray,
                    labels=None, label_names=None, title: str = ""):
    """Write fitted curves as an SVG line chart.

    Parameters
    ----------
    grid_points : (L,) evaluation times.
    values : (n, L) curve values, one polyline per row.
    labels : optional (n,) integer labels; curves are colored by label.
        Labels 0/1 use the scan palette (grey outside, red inside) when
        no more than two labels are present and 0 is among them.
    label_names : optional mapping from label to legend text.
    """
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    if labels is None:
        for row in values:
            ax.plot(grid_points, row, color="#1f77b4", linewidth=0.9, alpha=0.75)
    else:
        labels = np.asarray(labels)
        distinct = sorted(set(int(l) for l in labels))
        scan_style = 0 in distinct and len(distinct) <= 2
        seen = set()
        for row, label in zip(values, labels):
            label = int(label)
            if scan_style:
                color = SCAN_COLORS[label]
            else:
                color = _PALETTE[(label - 1) % len(_PALETTE)]
            name = None
            if label not in seen:
                seen.add(label)
                name = (label_names or {}).get(label, f"group {label}")
            ax.plot(grid_points, row, color=color, linewidth=0.9, alpha=0.8,
                    label=name)
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("t")
    ax.set_ylabel("value")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
