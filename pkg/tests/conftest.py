import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from trajkit.data import Trajectory, TrajectoryDataset, min_max_normalize
from trajkit.synth import SyntheticSpec, default_backbones, generate_synthetic


def make_dataset(points_per_traj, labels=None, ids=None) -> TrajectoryDataset:
    """Build a dataset from a list of (n, d) point arrays."""
    trajs = []
    for i, pts in enumerate(points_per_traj):
        trajs.append(
            Trajectory(
                id=ids[i] if ids else f"t{i}",
                points=np.asarray(pts, dtype=float),
                label=None if labels is None else labels[i],
            )
        )
    return TrajectoryDataset(tuple(trajs))


def separated_blob_dataset(k=4, per_cluster=25, noise=0.05, seed=0, lengths=(20, 30)):
    """Well-separated k-cluster synthetic dataset, min-max normalized."""
    spec = SyntheticSpec(
        backbones=default_backbones(k),
        per_cluster=per_cluster,
        noise_sigma=noise,
        length_range=lengths,
    )
    return min_max_normalize(generate_synthetic(spec, rng_seed=seed))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
