"""Point-based trajectory distances and pairwise distance matrices.

Hausdorff and DTW are the classic quadratic-cost baselines; kernel measures
are converted to distances through the kernel-induced metric so all four can
feed the same matrix consumers (external clusterers, retrieval, plots).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import Trajectory, TrajectoryDataset
from .dkernel import GDKParams, embed_sets, gdk_fit_nystrom, median_heuristic_gamma
from .ikernel import IKParams, IsolationKernelModel

MEASURES = ("hausdorff", "dtw", "idk_distance", "gdk_distance")


def _points(traj) -> np.ndarray:
    pts = traj.points if isinstance(traj, Trajectory) else np.asarray(traj, dtype=float)
    pts = np.atleast_2d(pts)
    if pts.shape[0] < 1:
        raise ValueError("empty trajectory")
    return pts


def hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between two trajectories as point sets.

    The larger of the two directed distances, each the worst-case nearest
    point gap from one set to the other. O(|a| * |b|) time.
    """
    pa, pb = _points(a), _points(b)
    if pa.shape[1] != pb.shape[1]:
        raise ValueError("trajectories have different dimensionality")
    D = cdist(pa, pb)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def dtw(a, b, band: int | None = None) -> float:
    """Dynamic time warping distance: the cheapest monotone alignment cost.

    Point cost is the Euclidean distance; steps are match/insert/delete with
    no weights, and the raw cost sum along the optimal path is returned (no
    path-length normalisation). ``band`` is an optional Sakoe-Chiba half-width
    limiting |i - j| along the alignment.
    """
    pa, pb = _points(a), _points(b)
    if pa.shape[1] != pb.shape[1]:
        raise ValueError("trajectories have different dimensionality")
    n, m = len(pa), len(pb)
    if band is not None:
        if band < abs(n - m):
            raise ValueError(f"band {band} infeasible for lengths {n} and {m}")
    cost = cdist(pa, pb)
    INF = np.inf
    prev = np.full(m, INF)
    for i in range(n):
        cur = np.full(m, INF)
        j_lo = 0 if band is None else max(0, i - band)
        j_hi = m - 1 if band is None else min(m - 1, i + band)
        for j in range(j_lo, j_hi + 1):
            if i == 0 and j == 0:
                best = 0.0
            else:
                best = min(
                    prev[j],                      # insert in a
                    cur[j - 1] if j > 0 else INF,  # insert in b
                    prev[j - 1] if j > 0 else INF,  # match
                )
            cur[j] = cost[i, j] + best
        prev = cur
    return float(prev[m - 1])


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric pairwise distance matrix with the trajectory ids it indexes."""

    ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        n = len(self.ids)
        if vals.shape != (n, n):
            raise ValueError(f"matrix shape {vals.shape} does not match {n} ids")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "ids", tuple(self.ids))

    def __len__(self) -> int:
        return len(self.ids)


def _kernel_to_distances(V: np.ndarray) -> np.ndarray:
    """Kernel-induced metric d(a,b) = sqrt(k(a,a) + k(b,b) - 2 k(a,b)) from mean maps."""
    gram = V @ V.T
    diag = np.diag(gram)
    d2 = diag[:, None] + diag[None, :] - 2.0 * gram
    np.maximum(d2, 0.0, out=d2)
    D = np.sqrt(d2)
    np.fill_diagonal(D, 0.0)
    return D


def _pairwise_pointbased(ds: TrajectoryDataset, fn, n_threads: int = 1, **kw) -> np.ndarray:
    n = len(ds)
    D = np.zeros((n, n))
    sets = ds.point_sets()

    def fill_row(i: int):
        for j in range(i + 1, n):
            try:
                D[i, j] = fn(sets[i], sets[j], **kw)
            except Exception as exc:
                raise RuntimeError(
                    f"distance failed for pair ({ds.ids[i]!r}, {ds.ids[j]!r}): {exc}"
                ) from exc

    if n_threads > 1:
        # rows are disjoint slices of D, so concurrent writes never collide
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            list(pool.map(fill_row, range(n)))
    else:
        for i in range(n):
            fill_row(i)
    return D + D.T


def pairwise_matrix(
    ds: TrajectoryDataset,
    measure: str,
    *,
    band: int | None = None,
    ik_params: IKParams | None = None,
    gdk_params: GDKParams | None = None,
    rng_seed: int = 0,
    n_threads: int = 1,
) -> DistanceMatrix:
    """All-pairs distance matrix of a dataset under one measure.

    Kernel measures embed every trajectory once (model fit on the pooled
    point set) and convert similarities via the kernel-induced metric;
    point-based measures evaluate each unordered pair directly.
    """
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}; expected one of {MEASURES}")
    if measure == "hausdorff":
        D = _pairwise_pointbased(ds, hausdorff, n_threads=n_threads)
    elif measure == "dtw":
        D = _pairwise_pointbased(ds, dtw, n_threads=n_threads, band=band)
    elif measure == "idk_distance":
        params = ik_params or IKParams(psi=16, t=100, rng_seed=rng_seed)
        model = IsolationKernelModel.fit(ds.pooled_points(), params)
        V = embed_sets(model, ds.point_sets())
        D = _kernel_to_distances(V)
    else:  # gdk_distance
        pooled = ds.pooled_points()
        if gdk_params is None:
            m = min(1024, len(pooled))
            gdk_params = GDKParams(
                gamma=median_heuristic_gamma(pooled, rng_seed=rng_seed),
                nystrom_samples=m,
                nystrom_rank=m,
                rng_seed=rng_seed,
            )
        nmap = gdk_fit_nystrom(pooled, gdk_params)
        V = embed_sets(nmap, ds.point_sets())
        D = _kernel_to_distances(V)
    return DistanceMatrix(ids=ds.ids, values=D)


def write_matrix_csv(dm: DistanceMatrix, path, measure: str | None = None, params: dict | None = None):
    """Write a matrix as CSV with an id header row/column, plus a JSON sidecar."""
    path = str(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id," + ",".join(dm.ids) + "\n")
        for tid, row in zip(dm.ids, dm.values):
            fh.write(tid + "," + ",".join(repr(float(v)) for v in row) + "\n")
    if measure is not None:
        meta = {"measure": measure, "params": params or {}, "n": len(dm)}
        with open(path.rsplit(".", 1)[0] + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)


def read_matrix_csv(path) -> DistanceMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        ids = tuple(header[1:])
        rows = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            rows.append([float(v) for v in parts[1:]])
    return DistanceMatrix(ids=ids, values=np.asarray(rows))
