"""Synthetic trajectory generation for tests and benchmarks.

Datasets are built from polyline backbones: every trajectory resamples one
backbone at a random length and adds Gaussian jitter. A direction-pair mode
emits each backbone in both traversal orders under distinct labels, which
simulates routes that coincide spatially but run in opposite directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Trajectory, TrajectoryDataset


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic dataset."""

    backbones: tuple[np.ndarray, ...]
    per_cluster: int = 20
    noise_sigma: float = 0.0
    length_range: tuple[int, int] = (20, 40)
    direction_pairs: bool = False

    def __post_init__(self):
        if len(self.backbones) == 0:
            raise ValueError("spec needs at least one backbone")
        bbs = []
        d = None
        for bb in self.backbones:
            arr = np.asarray(bb, dtype=float)
            if arr.ndim != 2 or arr.shape[0] < 1:
                raise ValueError("each backbone must be a non-empty (m, d) polyline")
            if d is None:
                d = arr.shape[1]
            elif arr.shape[1] != d:
                raise ValueError("all backbones must share dimensionality")
            arr.setflags(write=False)
            bbs.append(arr)
        object.__setattr__(self, "backbones", tuple(bbs))
        if self.per_cluster < 1:
            raise ValueError("per_cluster must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        lo, hi = self.length_range
        if not (1 <= lo <= hi):
            raise ValueError(f"invalid length range {self.length_range}")

    @property
    def n_labels(self) -> int:
        return len(self.backbones) * (2 if self.direction_pairs else 1)


def resample_polyline(backbone: np.ndarray, n: int) -> np.ndarray:
    """Resample a polyline at n points uniformly spaced in arc length."""
    bb = np.asarray(backbone, dtype=float)
    if len(bb) == 1:
        return np.repeat(bb, n, axis=0)
    seg = np.linalg.norm(np.diff(bb, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total == 0:
        return np.repeat(bb[:1], n, axis=0)
    frac = cum / total
    targets = np.linspace(0.0, 1.0, n)
    return np.column_stack([np.interp(targets, frac, bb[:, j]) for j in range(bb.shape[1])])


def generate_synthetic(spec: SyntheticSpec, rng_seed: int = 0) -> TrajectoryDataset:
    """Generate a labeled dataset from a spec, deterministically per seed.

    In direction-pair mode each backbone yields two labels (2j forward,
    2j+1 reversed); paired trajectories share their resampled polyline, so
    with zero noise the two labels cover identical point sets.
    """
    rng = np.random.default_rng(rng_seed)
    lo, hi = spec.length_range
    trajs: list[Trajectory] = []

    def jitter(base: np.ndarray) -> np.ndarray:
        if spec.noise_sigma == 0:
            return base
        return base + rng.normal(0.0, spec.noise_sigma, size=base.shape)

    for j, bb in enumerate(spec.backbones):
        for i in range(spec.per_cluster):
            n = int(rng.integers(lo, hi + 1))
            base = resample_polyline(bb, n)
            if spec.direction_pairs:
                fwd, rev = 2 * j, 2 * j + 1
                trajs.append(Trajectory(id=f"c{fwd}-{i}", points=jitter(base), label=fwd))
                trajs.append(Trajectory(id=f"c{rev}-{i}", points=jitter(base[::-1]), label=rev))
            else:
                trajs.append(Trajectory(id=f"c{j}-{i}", points=jitter(base), label=j))
    return TrajectoryDataset(tuple(trajs))


def default_backbones(k: int, dims: int = 2) -> tuple[np.ndarray, ...]:
    """k well-separated arc backbones laid out on a circle (2-D layout)."""
    if k < 1:
        raise ValueError("need at least one cluster")
    if dims < 2:
        raise ValueError("default backbones are 2-D or higher")
    radius = 10.0
    backbones = []
    for j in range(k):
        theta = 2.0 * np.pi * j / k
        cx, cy = radius * np.cos(theta), radius * np.sin(theta)
        # gentle arc of extent 4 centered on (cx, cy), oriented tangentially
        s = np.linspace(-2.0, 2.0, 8)
        curve = 0.25 * s**2
        dx, dy = -np.sin(theta), np.cos(theta)
        xs = cx + s * dx - curve * np.cos(theta)
        ys = cy + s * dy - curve * np.sin(theta)
        bb = np.column_stack([xs, ys])
        if dims > 2:
            bb = np.hstack([bb, np.zeros((len(bb), dims - 2))])
        backbones.append(bb)
    return tuple(backbones)


def parse_synth_config(path) -> SyntheticSpec:
    """Read a SyntheticSpec from a key = value text file.

    Recognised keys: clusters, per_cluster, sigma, min_len, max_len,
    direction_pairs, and optional backbone_1..backbone_K lines overriding the
    auto layout ("x,y x,y ..." with one point per space-separated token).
    """
    values: dict[str, str] = {}
    backbones: dict[int, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            if key.startswith("backbone_"):
                try:
                    idx = int(key.split("_", 1)[1])
                    pts = [[float(c) for c in tok.split(",")] for tok in val.split()]
                    backbones[idx] = np.asarray(pts, dtype=float)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad backbone: {exc}") from exc
            else:
                values[key] = val

    def geti(key: str, default: int) -> int:
        return int(values.get(key, default))

    direction_pairs = values.get("direction_pairs", "false").lower() in ("1", "true", "yes")
    if backbones:
        ordered = tuple(backbones[i] for i in sorted(backbones))
    else:
        ordered = default_backbones(geti("clusters", 2))
    return SyntheticSpec(
        backbones=ordered,
        per_cluster=geti("per_cluster", 20),
        noise_sigma=float(values.get("sigma", 0.0)),
        length_range=(geti("min_len", 20), geti("max_len", 40)),
        direction_pairs=direction_pairs,
    )
