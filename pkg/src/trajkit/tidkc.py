"""Two-level distributional-kernel trajectory clustering (TIDKC / TGDKC).

Level 1 embeds every trajectory as the mean feature map of its points, fit on
the pooled point set, turning each trajectory into one vector g_i. Level 2
fits a second kernel on those vectors and grows k clusters from density-peak
seeds: a similarity threshold tau starts at the best seed similarity and
decays geometrically; each pass assigns every unassigned vector whose
similarity to its best cluster distribution exceeds tau. Cluster mean maps
are refreshed once per pass (batch semantics), so the outcome does not depend
on point visitation order. Remaining vectors are attached to their most
similar cluster at the end.

TIDKC grows clusters with the isolation kernel; TGDKC substitutes the
Nystrom-approximated Gaussian kernel at level 2. Either kernel can provide
the level-1 trajectory representation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .data import TrajectoryDataset
from .dkernel import GDKParams, embed_sets, gdk_fit_nystrom, median_heuristic_gamma
from .ikernel import IKParams, IsolationKernelModel

KERNELS = ("idk", "gdk_nystrom")


@dataclass(frozen=True)
class TidkcParams:
    """Knobs of the two-level clustering pipeline.

    ``rng_seed`` is the master seed: per-stage seeds (level-1 fit, level-2
    fit, seed-selection subsample, bandwidth heuristics) are derived from it,
    and any ``rng_seed`` carried inside ``level1``/``level2`` is ignored here.
    """

    k: int
    rho: float = 0.9
    tau_floor: float = 1e-5
    level1: IKParams = field(default_factory=lambda: IKParams(psi=16, t=100))
    level2: IKParams = field(default_factory=lambda: IKParams(psi=4, t=100))
    seed_subset_s: int = 1000
    knn_for_contrast: int = 10
    kernel1: str = "idk"
    kernel2: str = "idk"
    gdk1: GDKParams | None = None
    gdk2: GDKParams | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if not (0.0 < self.rho < 1.0):
            raise ValueError(f"rho must be in (0, 1), got {self.rho}")
        if self.tau_floor <= 0:
            raise ValueError("tau_floor must be > 0")
        if self.knn_for_contrast < 1:
            raise ValueError("knn_for_contrast must be >= 1")
        if self.seed_subset_s < 1:
            raise ValueError("seed_subset_s must be >= 1")
        if self.kernel1 not in KERNELS or self.kernel2 not in KERNELS:
            raise ValueError(f"kernels must be one of {KERNELS}")

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "rho": self.rho,
            "tau_floor": self.tau_floor,
            "level1": {"psi": self.level1.psi, "t": self.level1.t},
            "level2": {"psi": self.level2.psi, "t": self.level2.t},
            "seed_subset_s": self.seed_subset_s,
            "knn_for_contrast": self.knn_for_contrast,
            "kernel1": self.kernel1,
            "kernel2": self.kernel2,
            "rng_seed": self.rng_seed,
        }


@dataclass
class ClusterState:
    """Evolving assignment state during cluster growing (internal, sequential)."""

    assignments: np.ndarray  # (n,) cluster index 0..k-1, or -1 while unassigned
    cluster_means: np.ndarray  # (k, D) mean feature map per cluster
    tau: float
    tau0: float
    iteration: int
    history: list = field(default_factory=list)  # (tau, total assigned) per pass

    @property
    def k(self) -> int:
        return self.cluster_means.shape[0]

    def unassigned(self) -> np.ndarray:
        return np.flatnonzero(self.assignments < 0)


@dataclass(frozen=True)
class ClusteringResult:
    labels: np.ndarray  # cluster id per trajectory, 1..k
    objective: float
    iterations: int
    history: tuple
    tau0: float
    seed_indices: tuple[int, ...]
    k: int
    timings: dict

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)


def _stage_seeds(rng_seed: int) -> list[int]:
    # deterministic per-stage seeds: level1 fit, level2 fit, subsample, gdk1, gdk2
    return [int(s) for s in np.random.SeedSequence(rng_seed).generate_state(5)]


def _fit_embedder(points: np.ndarray, kernel: str, ik: IKParams, gdk: GDKParams | None, seed: int):
    if kernel == "idk":
        return IsolationKernelModel.fit(points, replace(ik, rng_seed=seed))
    if gdk is None:
        m = min(1024, len(points))
        gdk = GDKParams(
            gamma=median_heuristic_gamma(points, rng_seed=seed),
            nystrom_samples=m,
            nystrom_rank=m,
            rng_seed=seed,
        )
    else:
        gdk = replace(gdk, rng_seed=seed)
    return gdk_fit_nystrom(points, gdk)


def embed_level1(ds: TrajectoryDataset, params: TidkcParams):
    """Map every trajectory to its level-1 mean map vector.

    Returns (G, embedder): G has one row per trajectory, and the fitted
    embedder reproduces the map for new points.
    """
    seeds = _stage_seeds(params.rng_seed)
    embedder = _fit_embedder(ds.pooled_points(), params.kernel1, params.level1, params.gdk1, seeds[0])
    G = embed_sets(embedder, ds.point_sets())
    return G, embedder


def _kernel_knn_distances(F: np.ndarray) -> np.ndarray:
    gram = F @ F.T
    diag = np.diag(gram)
    d2 = diag[:, None] + diag[None, :] - 2.0 * gram
    np.maximum(d2, 0.0, out=d2)
    return d2


def select_seeds(
    F2: np.ndarray,
    k: int,
    s: int | None = None,
    knn: int = 10,
    rng_seed: int = 0,
) -> np.ndarray:
    """Pick k cluster seeds as separated local density peaks.

    Works on a uniform subsample of at most s rows of the level-2 feature
    matrix. A row's density is its similarity to the subsample's mean map;
    its local contrast counts how many of its knn nearest neighbors (in the
    kernel-induced distance) have strictly lower density. Candidates are
    ranked by contrast times separation, where separation is the distance to
    the nearest better-ranked candidate (the usual density-peak device: the
    runner-up peak inside a cluster sits next to the top peak, so its
    separation collapses and a farther cluster's peak wins instead). Ties
    break by higher density, then lower index.
    """
    F2 = np.asarray(F2, dtype=float)
    n = len(F2)
    if n < k:
        raise ValueError(f"cannot select {k} seeds from {n} points")
    s = n if s is None else min(int(s), n)
    if s < k:
        raise ValueError(f"seed subsample size {s} is smaller than k={k}")
    rng = np.random.default_rng(rng_seed)
    sub = np.sort(rng.choice(n, size=s, replace=False))
    F = F2[sub]
    density = F @ F.mean(axis=0)
    d2 = _kernel_knn_distances(F)
    np.fill_diagonal(d2, np.inf)
    knn_eff = min(knn, s - 1)
    contrast = np.zeros(s, dtype=int)
    for i in range(s):
        neigh = np.argsort(d2[i], kind="stable")[:knn_eff]
        contrast[i] = int(np.sum(density[neigh] < density[i]))
    # separation: distance to the nearest point ranked better by (contrast,
    # density, index); the top-ranked point takes the largest distance seen
    order = np.lexsort((np.arange(s), -density, -contrast))
    dist = np.sqrt(np.where(np.isfinite(d2), d2, 0.0))
    separation = np.empty(s)
    for pos, i in enumerate(order):
        if pos == 0:
            separation[i] = dist[i].max() if s > 1 else 0.0
        else:
            separation[i] = dist[i, order[:pos]].min()
    score = contrast * separation
    ranked = np.lexsort((np.arange(s), -density, -score))
    return sub[ranked[:k]]


def _cluster_means(F2: np.ndarray, assignments: np.ndarray, k: int) -> np.ndarray:
    assigned = assignments >= 0
    sums = np.zeros((k, F2.shape[1]))
    np.add.at(sums, assignments[assigned], F2[assigned])
    counts = np.bincount(assignments[assigned], minlength=k)
    return sums / counts[:, None]


def grow_clusters(
    F2: np.ndarray,
    seeds: np.ndarray,
    rho: float = 0.9,
    tau_floor: float = 1e-5,
) -> ClusterState:
    """Grow k clusters from seed rows under a geometrically decaying threshold.

    Each pass decays tau once, then assigns every unassigned row whose best
    cluster similarity exceeds tau to that cluster (argmax ties go to the
    lowest cluster index). Cluster mean maps are recomputed from members at
    the end of each pass. Stops when nothing is left or tau falls below the
    floor; rows may remain unassigned for final_assign to place.
    """
    F2 = np.asarray(F2, dtype=float)
    seeds = np.asarray(seeds, dtype=int)
    if len(np.unique(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    n, k = len(F2), len(seeds)
    assignments = np.full(n, -1, dtype=int)
    assignments[seeds] = np.arange(k)
    means = F2[seeds].copy()

    unassigned = np.flatnonzero(assignments < 0)
    if len(unassigned) == 0:
        return ClusterState(assignments, means, tau=0.0, tau0=0.0, iteration=0)

    tau0 = float((F2[unassigned] @ means.T).max())
    tau = tau0
    state = ClusterState(assignments, means, tau=tau, tau0=tau0, iteration=0)
    while True:
        tau *= rho
        state.iteration += 1
        sims = F2[unassigned] @ means.T
        best_cluster = sims.argmax(axis=1)
        best_sim = sims[np.arange(len(unassigned)), best_cluster]
        take = best_sim > tau
        assignments[unassigned[take]] = best_cluster[take]
        means = _cluster_means(F2, assignments, k)
        unassigned = np.flatnonzero(assignments < 0)
        state.tau = tau
        state.cluster_means = means
        state.history.append((tau, int(n - len(unassigned))))
        if len(unassigned) == 0 or tau < tau_floor:
            return state


def final_assign(state: ClusterState, F2: np.ndarray) -> tuple[np.ndarray, float]:
    """Attach residual rows to their most similar cluster and score the result.

    Returns 1-based labels and the clustering objective: the sum over all
    rows of their similarity to their own final cluster's mean map.
    """
    F2 = np.asarray(F2, dtype=float)
    assignments = state.assignments.copy()
    residual = np.flatnonzero(assignments < 0)
    if len(residual) > 0:
        sims = F2[residual] @ state.cluster_means.T
        assignments[residual] = sims.argmax(axis=1)
    means = _cluster_means(F2, assignments, state.k)
    objective = float(np.einsum("ij,ij->", F2, means[assignments]))
    return assignments + 1, objective


def cluster(ds: TrajectoryDataset, params: TidkcParams) -> ClusteringResult:
    """Run the full pipeline: embed, seed, grow, finalize.

    Wall time of each phase is recorded in the result's ``timings`` dict
    (keys build_ik, feature_map, seed_selection, growing, final_assign,
    total); the measurement never influences the labels.
    """
    n = len(ds)
    if n < params.k:
        raise ValueError(f"dataset has {n} trajectories but k={params.k}")
    seeds_per_stage = _stage_seeds(params.rng_seed)
    timings = dict.fromkeys(
        ("build_ik", "feature_map", "seed_selection", "growing", "final_assign"), 0.0
    )
    t_start = time.perf_counter()

    tic = time.perf_counter()
    level1 = _fit_embedder(
        ds.pooled_points(), params.kernel1, params.level1, params.gdk1, seeds_per_stage[0]
    )
    timings["build_ik"] += time.perf_counter() - tic

    tic = time.perf_counter()
    G = embed_sets(level1, ds.point_sets())
    timings["feature_map"] += time.perf_counter() - tic

    tic = time.perf_counter()
    level2 = _fit_embedder(G, params.kernel2, params.level2, params.gdk2, seeds_per_stage[1])
    timings["build_ik"] += time.perf_counter() - tic

    tic = time.perf_counter()
    F2 = level2.point_features(G)
    timings["feature_map"] += time.perf_counter() - tic

    tic = time.perf_counter()
    seed_idx = select_seeds(
        F2,
        params.k,
        s=min(n, params.seed_subset_s),
        knn=params.knn_for_contrast,
        rng_seed=seeds_per_stage[2],
    )
    timings["seed_selection"] += time.perf_counter() - tic

    tic = time.perf_counter()
    state = grow_clusters(F2, seed_idx, rho=params.rho, tau_floor=params.tau_floor)
    timings["growing"] += time.perf_counter() - tic

    tic = time.perf_counter()
    labels, objective = final_assign(state, F2)
    timings["final_assign"] += time.perf_counter() - tic

    timings["total"] = time.perf_counter() - t_start
    return ClusteringResult(
        labels=labels,
        objective=objective,
        iterations=state.iteration,
        history=tuple(state.history),
        tau0=state.tau0,
        seed_indices=tuple(int(i) for i in seed_idx),
        k=params.k,
        timings=timings,
    )


def nearest_seed_labels(G: np.ndarray, seed_indices) -> np.ndarray:
    """Single-pass baseline: each row joins the most similar seed (1-based labels)."""
    G = np.asarray(G, dtype=float)
    sims = G @ G[np.asarray(seed_indices, dtype=int)].T
    return sims.argmax(axis=1) + 1
