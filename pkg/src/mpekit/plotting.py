"""Static SVG figures for experiment summaries.

Rendering targets files only (Agg backend, no display server) and is kept
byte-stable for fixed inputs: the SVG creation date is stripped and element
id hashing is salted with a fixed string.
"""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["svg.hashsalt"] = "mpekit"


def render_mae_plot(summary_rows: Sequence[dict], scenario: str, out_path: str) -> str:
    """Plot MAE against the true proportion, one line per estimator/variant.

    ``summary_rows`` are aggregate dicts with keys kappa_star, estimator,
    variant and mae.  Returns the written path.
    """
    rows = [r for r in summary_rows if r.get("scenario", scenario) == scenario]
    series = {}
    for r in sorted(rows, key=lambda r: (r["estimator"], r["variant"], r["kappa_star"])):
        series.setdefault((r["estimator"], r["variant"]), []).append(
            (r["kappa_star"], r["mae"])
        )
    fig, ax = plt.subplots(figsize=(6, 4))
    for (est, variant), pts in sorted(series.items()):
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", label=f"{est}/{variant}")
    ax.set_xlabel("true proportion")
    ax.set_ylabel("mean absolute error")
    ax.set_title(scenario)
    if series:
        ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path
