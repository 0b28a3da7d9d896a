"""Figure rendering for the CLI report paths.

Every reporting command writes its delimited output first and then, unless
plots are disabled, renders a companion PNG through these helpers. The Agg
backend keeps rendering deterministic and headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import TrajectoryDataset

_CMAP = plt.get_cmap("tab10")


def _save(fig, path) -> str:
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def plot_dataset(ds: TrajectoryDataset, path, labels=None, title: str = "") -> str:
    """Trajectories as polylines in the first two coordinates, colored by label."""
    if labels is None:
        labels = ds.labels() if ds.has_labels() else np.zeros(len(ds), dtype=int)
    labels = np.asarray(labels)
    fig, ax = plt.subplots(figsize=(6, 6))
    for tr, lab in zip(ds, labels):
        xy = tr.points[:, :2] if tr.dims >= 2 else np.column_stack(
            [np.arange(len(tr)), tr.points[:, 0]]
        )
        ax.plot(xy[:, 0], xy[:, 1], color=_CMAP(int(lab) % 10), alpha=0.6, linewidth=1.0)
        ax.plot(xy[0, 0], xy[0, 1], marker=".", color=_CMAP(int(lab) % 10), markersize=3)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    ax.set_aspect("equal", adjustable="datalim")
    return _save(fig, path)


def plot_precision_curve(ks, precision, path, label: str = "measure") -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(list(ks), list(precision), marker="o", label=label)
    ax.set_xlabel("k")
    ax.set_ylabel("precision@k")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_distance_matrix(values: np.ndarray, path, title: str = "") -> str:
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(np.asarray(values), cmap="viridis")
    fig.colorbar(im, ax=ax, label="distance")
    ax.set_title(title)
    ax.set_xlabel("trajectory index")
    ax.set_ylabel("trajectory index")
    return _save(fig, path)


def plot_scaleup(records, path) -> str:
    """log-log wall time against n for the total phase of each target."""
    fig, ax = plt.subplots(figsize=(6, 4))
    by_target: dict[str, list] = {}
    for rec in records:
        if rec.phase == "total":
            by_target.setdefault(rec.target, []).append((rec.n, rec.wall_time))
    for target, pts in by_target.items():
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=target)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n trajectories")
    ax.set_ylabel("seconds")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_sweep(rows, path) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    rates = [r["rate"] for r in rows]
    ax.plot(rates, [r["nmi"] for r in rows], marker="o", label="NMI")
    ax.plot(rates, [r["ari"] for r in rows], marker="s", label="ARI")
    ax.set_xlabel("sampling rate")
    ax.set_ylabel("score")
    ax.set_ylim(0.0, 1.05)
    ax.invert_xaxis()
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)
