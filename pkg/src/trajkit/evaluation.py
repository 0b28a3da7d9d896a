"""External clustering validation and retrieval evaluation.

NMI and ARI are computed from the label contingency table; precision@k ranks
neighbors per query under a similarity or distance matrix. All functions are
pure and label-permutation invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def _check_labels(true_labels, pred_labels, min_len: int = 1):
    u = np.asarray(true_labels)
    v = np.asarray(pred_labels)
    if u.ndim != 1 or v.ndim != 1:
        raise ValueError("label vectors must be one-dimensional")
    if len(u) != len(v):
        raise ValueError(f"label length mismatch: {len(u)} vs {len(v)}")
    if len(u) < min_len:
        raise ValueError(f"need at least {min_len} labels, got {len(u)}")
    return u, v


def contingency_table(true_labels, pred_labels) -> np.ndarray:
    """r x c matrix of co-occurrence counts between two labelings."""
    u, v = _check_labels(true_labels, pred_labels)
    _, ui = np.unique(u, return_inverse=True)
    _, vi = np.unique(v, return_inverse=True)
    table = np.zeros((ui.max() + 1, vi.max() + 1), dtype=np.int64)
    np.add.at(table, (ui, vi), 1)
    return table


def nmi(true_labels, pred_labels) -> float:
    """Normalized mutual information with sqrt (geometric mean) normalisation.

    Natural-log entropies; 0 log 0 counts as 0. Two single-cluster labelings
    agree perfectly (1.0); a single cluster against a split scores 0.0.
    Integer marginals and exact (fsum) accumulation make the value strictly
    invariant under relabeling of either argument.
    """
    table = contingency_table(true_labels, pred_labels)
    n = int(table.sum())
    row = table.sum(axis=1)
    col = table.sum(axis=0)
    hu = -math.fsum(r / n * math.log(r / n) for r in row if r > 0)
    hv = -math.fsum(c / n * math.log(c / n) for c in col if c > 0)
    if hu == 0.0 and hv == 0.0:
        return 1.0
    if hu == 0.0 or hv == 0.0:
        return 0.0
    mi = math.fsum(
        (table[i, j] / n) * math.log(n * table[i, j] / (row[i] * col[j]))
        for i in range(table.shape[0])
        for j in range(table.shape[1])
        if table[i, j] > 0
    )
    return float(min(max(mi / math.sqrt(hu * hv), 0.0), 1.0))


def ari(true_labels, pred_labels) -> float:
    """Adjusted Rand index from pair counting over the contingency table."""
    u, v = _check_labels(true_labels, pred_labels, min_len=2)
    table = contingency_table(u, v)
    n = int(table.sum())

    def comb2(x):
        return x * (x - 1) // 2

    sum_ij = int(comb2(table).sum())
    sum_a = int(comb2(table.sum(axis=1)).sum())
    sum_b = int(comb2(table.sum(axis=0)).sum())
    total = comb2(n)
    expected = sum_a * sum_b / total
    maximum = (sum_a + sum_b) / 2.0
    if maximum == expected:
        return 1.0
    return float((sum_ij - expected) / (maximum - expected))


@dataclass(frozen=True)
class PrecisionCurve:
    """Average retrieval precision at each requested neighborhood size."""

    ks: tuple[int, ...]
    precision: np.ndarray

    def __post_init__(self):
        prec = np.asarray(self.precision, dtype=float)
        if len(prec) != len(self.ks):
            raise ValueError("ks and precision lengths differ")
        prec.setflags(write=False)
        object.__setattr__(self, "precision", prec)
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("k,precision\n")
            for k, p in zip(self.ks, self.precision):
                fh.write(f"{k},{float(p)!r}\n")


def precision_at_k(
    scores: np.ndarray,
    labels,
    ks: Sequence[int],
    higher_is_better: bool = True,
) -> PrecisionCurve:
    """Mean fraction of same-label trajectories among each query's top k.

    Every row of the n x n score matrix is one query; the query itself is
    excluded from its neighbor list and ranking ties are broken by lower
    index, so results are deterministic on degenerate score structures.
    """
    S = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    n = S.shape[0]
    if S.shape != (n, n):
        raise ValueError("scores must be a square matrix")
    if len(y) != n:
        raise ValueError("labels length does not match matrix size")
    ks = [int(k) for k in ks]
    if any(k < 1 for k in ks):
        raise ValueError("every k must be >= 1")
    if max(ks) >= n:
        raise ValueError(f"k={max(ks)} must be smaller than the dataset size {n}")

    kmax = max(ks)
    hits = np.zeros((n, kmax), dtype=float)
    for i in range(n):
        key = -S[i] if higher_is_better else S[i].copy()
        key[i] = np.inf  # self never retrieved
        order = np.argsort(key, kind="stable")[:kmax]
        hits[i] = y[order] == y[i]
    cum = hits.cumsum(axis=1)
    prec = [float(np.mean(cum[:, k - 1] / k)) for k in ks]
    return PrecisionCurve(ks=tuple(ks), precision=np.asarray(prec))


def similarity_matrix(embeddings: np.ndarray) -> np.ndarray:
    """Pairwise dot-product similarity of embedding rows."""
    V = np.asarray(embeddings, dtype=float)
    return V @ V.T


def run_sampling_sweep(ds, rates: Sequence[float], selection: str, params, rng_seed: int = 0):
    """Cluster the dataset at several sampling rates and score NMI per rate.

    Returns a list of {"rate", "nmi", "ari"} rows in the requested rate order.
    Requires a labeled dataset; clustering itself never sees the labels.
    """
    from .data import downsample
    from .tidkc import cluster

    if not ds.has_labels():
        raise ValueError("sampling sweep requires a labeled dataset")
    truth = ds.labels()
    rows = []
    for rate in rates:
        thinned = downsample(ds, rate=float(rate), selection=selection, rng_seed=rng_seed)
        result = cluster(thinned, params)
        rows.append(
            {
                "rate": float(rate),
                "nmi": nmi(truth, result.labels),
                "ari": ari(truth, result.labels),
            }
        )
    return rows
