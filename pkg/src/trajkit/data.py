"""Trajectory containers, file ingestion and preprocessing.

A trajectory is an ordered sequence of d-dimensional points. Datasets keep
trajectories immutable after construction so they can be shared freely
between threads and reused across pipeline stages.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np


class DatasetFormatError(ValueError):
    """Raised when an input file cannot be parsed into a dataset."""


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
        raise ValueError("points must be a non-empty (n, d) array")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain NaN or Inf")
    return pts


@dataclass(frozen=True)
class Trajectory:
    """One trajectory: an id, an optional integer label and (n, d) points."""

    id: str
    points: np.ndarray
    label: int | None = None

    def __post_init__(self):
        pts = _as_points(self.points)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.label is not None:
            object.__setattr__(self, "label", int(self.label))

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dims(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class TrajectoryDataset:
    """An ordered collection of trajectories sharing one dimensionality."""

    trajectories: tuple[Trajectory, ...] = field(default_factory=tuple)

    def __post_init__(self):
        trajs = tuple(self.trajectories)
        if not trajs:
            raise ValueError("dataset must contain at least one trajectory")
        d = trajs[0].dims
        for tr in trajs:
            if tr.dims != d:
                raise DatasetFormatError(
                    f"dimension mismatch: trajectory {tr.id!r} has d={tr.dims}, expected d={d}"
                )
        ids = [tr.id for tr in trajs]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise DatasetFormatError(f"duplicate trajectory ids: {dup}")
        object.__setattr__(self, "trajectories", trajs)

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)

    def __getitem__(self, i: int) -> Trajectory:
        return self.trajectories[i]

    @property
    def dims(self) -> int:
        return self.trajectories[0].dims

    @property
    def pooled_point_count(self) -> int:
        return sum(len(tr) for tr in self.trajectories)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(tr.id for tr in self.trajectories)

    def has_labels(self) -> bool:
        return all(tr.label is not None for tr in self.trajectories)

    def labels(self) -> np.ndarray:
        """Label vector in trajectory order. Raises if any label is missing."""
        if not self.has_labels():
            raise ValueError("dataset is not fully labeled")
        return np.array([tr.label for tr in self.trajectories], dtype=int)

    def pooled_points(self) -> np.ndarray:
        """All points of all trajectories stacked in dataset order."""
        return np.concatenate([tr.points for tr in self.trajectories], axis=0)

    def point_sets(self) -> list[np.ndarray]:
        return [tr.points for tr in self.trajectories]


def load_dataset(path, format: str = "jsonl") -> TrajectoryDataset:
    """Read a dataset from a JSONL or long-form CSV file.

    JSONL carries one trajectory object per line; CSV long format has one
    point per row with header ``traj_id,seq,x1,...,xd[,label]``.
    """
    if format == "jsonl":
        return _load_jsonl(path)
    if format == "csv_long":
        return _load_csv_long(path)
    raise ValueError(f"unknown dataset format: {format!r}")


def _load_jsonl(path) -> TrajectoryDataset:
    trajs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            try:
                traj = Trajectory(
                    id=str(obj["id"]),
                    points=obj["points"],
                    label=obj.get("label"),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise DatasetFormatError(f"{path}:{lineno}: bad trajectory record: {exc}") from exc
            trajs.append(traj)
    if not trajs:
        raise DatasetFormatError(f"{path}: empty dataset file")
    return TrajectoryDataset(tuple(trajs))


def _load_csv_long(path) -> TrajectoryDataset:
    groups: dict[str, list[tuple[int, list[float], int | None]]] = {}
    order: list[str] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"{path}: empty dataset file") from None
        header = [h.strip() for h in header]
        if len(header) < 3 or header[0] != "traj_id" or header[1] != "seq":
            raise DatasetFormatError(
                f"{path}:1: expected header traj_id,seq,x1,...[,label], got {header}"
            )
        has_label = header[-1] == "label"
        ncoord = len(header) - 2 - (1 if has_label else 0)
        if ncoord < 1:
            raise DatasetFormatError(f"{path}:1: header declares no coordinate columns")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetFormatError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            tid = row[0]
            try:
                seq = int(row[1])
                coords = [float(v) for v in row[2 : 2 + ncoord]]
                label = int(row[-1]) if has_label else None
            except ValueError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: {exc}") from exc
            if tid not in groups:
                groups[tid] = []
                order.append(tid)
            groups[tid].append((seq, coords, label))
    if not groups:
        raise DatasetFormatError(f"{path}: empty dataset file")
    trajs = []
    for tid in order:
        rows = sorted(groups[tid], key=lambda r: r[0])
        labels = {r[2] for r in rows}
        if len(labels) > 1:
            raise DatasetFormatError(f"{path}: trajectory {tid!r} has inconsistent labels {labels}")
        trajs.append(Trajectory(id=tid, points=[r[1] for r in rows], label=rows[0][2]))
    return TrajectoryDataset(tuple(trajs))


def save_dataset(ds: TrajectoryDataset, path) -> None:
    """Write a dataset as JSONL with full round-trip float precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for tr in ds:
            obj: dict = {"id": tr.id}
            if tr.label is not None:
                obj["label"] = tr.label
            obj["points"] = [[float(v) for v in p] for p in tr.points]
            fh.write(json.dumps(obj) + "\n")


def min_max_normalize(ds: TrajectoryDataset) -> TrajectoryDataset:
    """Rescale each axis so the pooled point set spans [0, 1].

    Constant axes map to 0.5. Returns a new dataset; the input is untouched.
    """
    pooled = ds.pooled_points()
    lo = pooled.min(axis=0)
    hi = pooled.max(axis=0)
    span = hi - lo
    const = span == 0
    span_safe = np.where(const, 1.0, span)
    out = []
    for tr in ds:
        pts = (tr.points - lo) / span_safe
        if const.any():
            pts[:, const] = 0.5
        out.append(Trajectory(id=tr.id, points=pts, label=tr.label))
    return TrajectoryDataset(tuple(out))


def _stride_indices(n: int, keep: int) -> np.ndarray:
    # Uniform striding over [0, n-1]; endpoints are kept whenever keep >= 2.
    # keep == 1 degenerates to the first point only.
    if keep >= n:
        return np.arange(n)
    return np.round(np.linspace(0.0, n - 1, keep)).astype(int)


def downsample(
    ds: TrajectoryDataset,
    rate: float,
    selection: str = "all",
    rng_seed: int = 0,
) -> TrajectoryDataset:
    """Reduce the sampling rate of trajectories by uniform index striding.

    Each selected trajectory keeps ceil(rate * n) points, endpoints included,
    mimicking a sensor recording at a lower frequency. ``selection='all'``
    thins every trajectory; ``'half_per_cluster'`` thins a random half of the
    trajectories of each label (requires labels).
    """
    if not (0.0 < rate <= 1.0):
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    if selection not in ("all", "half_per_cluster"):
        raise ValueError(f"unknown selection mode: {selection!r}")

    if selection == "all":
        selected = set(range(len(ds)))
    else:
        if not ds.has_labels():
            raise ValueError("half_per_cluster downsampling requires a labeled dataset")
        rng = np.random.default_rng(rng_seed)
        selected = set()
        labels = ds.labels()
        for lab in np.unique(labels):
            members = np.flatnonzero(labels == lab)
            take = len(members) // 2
            if take > 0:
                chosen = rng.choice(members, size=take, replace=False)
                selected.update(int(i) for i in chosen)

    out = []
    for i, tr in enumerate(ds):
        if i in selected and rate < 1.0:
            n = len(tr)
            keep = math.ceil(rate * n)
            pts = tr.points[_stride_indices(n, keep)]
            out.append(Trajectory(id=tr.id, points=pts, label=tr.label))
        else:
            out.append(tr)
    return TrajectoryDataset(tuple(out))


def augment_order_dimension(ds: TrajectoryDataset, weight: float = 1.0) -> TrajectoryDataset:
    """Append a traversal-order coordinate to every point.

    Point i of a length-n trajectory gains the value weight * i / max(n-1, 1),
    a linear 0..weight ramp independent of any original timestamps. Two
    trajectories covering the same locations in opposite orders become
    distinguishable as point sets.
    """
    if weight <= 0:
        raise ValueError(f"order-dimension weight must be > 0, got {weight}")
    out = []
    for tr in ds:
        n = len(tr)
        ramp = weight * np.arange(n, dtype=float) / max(n - 1, 1)
        pts = np.hstack([tr.points, ramp[:, None]])
        out.append(Trajectory(id=tr.id, points=pts, label=tr.label))
    return TrajectoryDataset(tuple(out))
