"""Figures for the type-growth profile (written to files, never shown)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .witness import fit_loglog  # noqa: E402


def plot_profile(tables, path, title=None):
    """Log-log plot of 1-type counts against structure size, one series per table.

    ``tables`` maps a series label to rows ``(m, size, count)``.
    """
    fig, ax = plt.subplots(figsize=(5.5, 4.0), dpi=100)
    for label, rows in sorted(tables.items()):
        sizes = np.array([r[1] for r in rows], dtype=float)
        counts = np.array([r[2] for r in rows], dtype=float)
        slope, _ = fit_loglog(rows)
        ax.plot(sizes, counts, marker="o", label=f"{label} (slope {slope:.2f})")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("|A|")
    ax.set_ylabel("number of 1-types over A")
    if title:
        ax.set_title(title)
    ax.legend(fontsize="small")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    # no timestamps or version strings, so reruns are byte-identical
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
    return path
