"""Small helpers shared by the experiment scripts."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def write_curves(path: Path, curves: dict[str, np.ndarray]):
    """One column per method, padded with nan, first column the iteration index."""
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(curves)
    length = max(len(v) for v in curves.values())
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter"] + names)
        for i in range(length):
            w.writerow([i + 1] + ["%.10g" % (curves[n][i] if i < len(curves[n]) else np.nan) for n in names])
    print(f"wrote {path}")


def plot_curves(path: Path, curves: dict[str, np.ndarray], ylabel: str = "relative error", logy: bool = True):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for name, v in curves.items():
        ax.plot(np.arange(1, len(v) + 1), v, label=name)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    print(f"wrote {path}")
