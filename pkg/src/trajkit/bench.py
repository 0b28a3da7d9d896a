"""Wall-clock scaling harness for measures and clustering.

Datasets are scaled by replicating trajectories with Gaussian jitter, so the
cluster structure (and hence iteration counts) stays comparable across sizes
while n grows. Each target is timed several times and the median run is
reported, which resists scheduler noise at desk scale.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import pairwise_matrix
from .data import Trajectory, TrajectoryDataset
from .dkernel import GDKParams, embed_sets, gdk_fit_nystrom, median_heuristic_gamma
from .ikernel import IKParams, IsolationKernelModel
from .tidkc import TidkcParams, cluster

TARGETS = ("idk_embed", "gdk_embed", "hausdorff_matrix", "dtw_matrix", "tidkc", "tgdkc")
PHASES = ("build_ik", "feature_map", "seed_selection", "growing", "final_assign", "total")


@dataclass(frozen=True)
class TimingRecord:
    target: str
    phase: str
    n: int
    wall_time: float
    params: dict = field(default_factory=dict)
    threads: int = 1


def scale_dataset(base: TrajectoryDataset, multiplier: int, rng_seed: int = 0) -> TrajectoryDataset:
    """Replicate every trajectory multiplier times with per-copy jitter.

    Jitter sigma is 1% of the pooled coordinate range, enough to make copies
    distinct without moving them between clusters. Deterministic per seed.
    """
    if multiplier < 1:
        raise ValueError("multiplier must be >= 1")
    if multiplier == 1:
        return base
    rng = np.random.default_rng(rng_seed)
    pooled = base.pooled_points()
    span = float((pooled.max(axis=0) - pooled.min(axis=0)).max())
    sigma = 0.01 * span if span > 0 else 0.01
    trajs = list(base.trajectories)
    for rep in range(1, multiplier):
        for tr in base:
            pts = tr.points + rng.normal(0.0, sigma, size=tr.points.shape)
            trajs.append(Trajectory(id=f"{tr.id}~r{rep}", points=pts, label=tr.label))
    return TrajectoryDataset(tuple(trajs))


def _run_target(ds: TrajectoryDataset, target: str, tidkc_params: TidkcParams | None, seed: int):
    """Execute one target once; returns (total_seconds, phase_timings or None)."""
    if target == "idk_embed":
        tic = time.perf_counter()
        model = IsolationKernelModel.fit(ds.pooled_points(), IKParams(psi=16, t=100, rng_seed=seed))
        embed_sets(model, ds.point_sets())
        return time.perf_counter() - tic, None
    if target == "gdk_embed":
        tic = time.perf_counter()
        pooled = ds.pooled_points()
        m = min(1024, len(pooled))
        params = GDKParams(
            gamma=median_heuristic_gamma(pooled, rng_seed=seed),
            nystrom_samples=m,
            nystrom_rank=m,
            rng_seed=seed,
        )
        embed_sets(gdk_fit_nystrom(pooled, params), ds.point_sets())
        return time.perf_counter() - tic, None
    if target in ("hausdorff_matrix", "dtw_matrix"):
        measure = "hausdorff" if target == "hausdorff_matrix" else "dtw"
        tic = time.perf_counter()
        pairwise_matrix(ds, measure)
        return time.perf_counter() - tic, None
    if target in ("tidkc", "tgdkc"):
        if tidkc_params is None:
            raise ValueError(f"target {target!r} needs clustering parameters")
        kernel2 = "idk" if target == "tidkc" else "gdk_nystrom"
        result = cluster(ds, replace(tidkc_params, kernel2=kernel2, rng_seed=seed))
        return result.timings["total"], result.timings
    raise ValueError(f"unknown benchmark target {target!r}; expected one of {TARGETS}")


def scaleup_run(
    base: TrajectoryDataset,
    multipliers: list[int],
    target: str,
    reps: int = 3,
    rng_seed: int = 0,
    tidkc_params: TidkcParams | None = None,
) -> list[TimingRecord]:
    """Time one target at several dataset scales; median-of-reps per scale.

    For clustering targets the phase breakdown of the median run is included
    alongside the total.
    """
    if target not in TARGETS:
        raise ValueError(f"unknown benchmark target {target!r}; expected one of {TARGETS}")
    if not multipliers or multipliers[0] != 1 or any(
        b <= a for a, b in zip(multipliers, multipliers[1:])
    ):
        raise ValueError("multipliers must be increasing and start at 1")
    if reps < 1:
        raise ValueError("reps must be >= 1")

    snapshot = {"target": target, "reps": reps, "rng_seed": rng_seed}
    if tidkc_params is not None:
        snapshot["tidkc"] = tidkc_params.to_dict()

    records = []
    for mult in multipliers:
        ds = scale_dataset(base, mult, rng_seed=rng_seed)
        runs = [_run_target(ds, target, tidkc_params, seed=rng_seed) for _ in range(reps)]
        totals = [r[0] for r in runs]
        median_run = runs[int(np.argsort(totals)[len(totals) // 2])]
        records.append(
            TimingRecord(target=target, phase="total", n=len(ds), wall_time=median_run[0], params=snapshot)
        )
        if median_run[1] is not None:
            for phase in PHASES:
                if phase == "total":
                    continue
                records.append(
                    TimingRecord(
                        target=target,
                        phase=phase,
                        n=len(ds),
                        wall_time=median_run[1][phase],
                        params=snapshot,
                    )
                )
    return records


def phase_breakdown(ds: TrajectoryDataset, params: TidkcParams) -> list[TimingRecord]:
    """Per-phase wall times of a single instrumented clustering run."""
    result = cluster(ds, params)
    snapshot = {"tidkc": params.to_dict(), "iterations": result.iterations}
    target = "tidkc" if params.kernel2 == "idk" else "tgdkc"
    return [
        TimingRecord(target=target, phase=phase, n=len(ds), wall_time=result.timings[phase], params=snapshot)
        for phase in PHASES
    ]


def write_timings_csv(records: list[TimingRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("target,phase,n,seconds\n")
        for rec in records:
            fh.write(f"{rec.target},{rec.phase},{rec.n},{rec.wall_time!r}\n")
