"""Figure rendering for report outputs. Import stays optional: only the CLI
report paths need matplotlib."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import DensityReport


def density_figure(report: DensityReport, path) -> None:
    """Grouped bar chart of the top-N label counts, one group per label,
    one bar per corpus; written as a PNG with no volatile metadata."""
    labels = report.ranking()
    names = report.names
    x = np.arange(len(labels))
    width = 0.8 / max(len(names), 1)

    fig, ax = plt.subplots(figsize=(max(6.0, 1.0 * len(labels)), 4.0))
    for offset, name in enumerate(names):
        counts = [report.counts[name].get(label, 0) for label in labels]
        ax.bar(x + offset * width, counts, width, label=name)
    ax.set_xticks(x + width * (len(names) - 1) / 2)
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylabel("count")
    ax.set_title(f"top {len(labels)} labels by {report.reference} frequency")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
