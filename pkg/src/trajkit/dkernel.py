"""Distributional kernels: mean embeddings of point sets.

A point set is represented by the average of its points' kernel feature
vectors. The dot product of two such mean maps equals the average pairwise
point kernel between the sets, so set similarity costs one dot product after
embedding instead of a quadratic double sum. Two base kernels are provided:
the Isolation Kernel (sparse one-hot features) and a Gaussian kernel
approximated by a Nystrom feature map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .ikernel import IsolationKernelModel

_CHUNK = 4096


@dataclass(frozen=True)
class MeanMapVector:
    """Mean feature map of a point set: a single dense feature-space vector."""

    values: np.ndarray
    source_size: int
    kernel_tag: str  # "idk" | "gdk_nystrom"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.source_size < 1:
            raise ValueError("mean map must average at least one point")

    @property
    def dimension(self) -> int:
        return self.values.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


def embed_set_idk(model: IsolationKernelModel, pts: np.ndarray) -> MeanMapVector:
    """Average Isolation Kernel feature map over a point set."""
    pts = np.asarray(pts, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("point set must be a non-empty (n, d) array")
    cells = model.cell_assignments(pts)
    n, t = cells.shape
    values = np.zeros(model.feature_dim)
    np.add.at(values, (np.arange(t) * model.params.psi)[None, :] + cells, 1.0)
    values /= n * np.sqrt(t)
    return MeanMapVector(values=values, source_size=n, kernel_tag="idk")


def embed_sets(embedder, sets: list[np.ndarray]) -> np.ndarray:
    """Mean-map matrix for many point sets, one row per set.

    ``embedder`` is a fitted IsolationKernelModel or NystromMap; its
    ``point_features`` output is accumulated in chunks so the full per-point
    feature matrix is never materialised.
    """
    if len(sets) == 0:
        raise ValueError("no point sets to embed")
    sizes = np.array([len(s) for s in sets])
    if (sizes < 1).any():
        raise ValueError("point sets must be non-empty")
    allpts = np.concatenate([np.asarray(s, dtype=float) for s in sets], axis=0)
    set_idx = np.repeat(np.arange(len(sets)), sizes)
    dim = embedder.feature_dim
    sums = np.zeros((len(sets), dim))
    for start in range(0, len(allpts), _CHUNK):
        F = embedder.point_features(allpts[start : start + _CHUNK])
        np.add.at(sums, set_idx[start : start + _CHUNK], F)
    return sums / sizes[:, None]


def idk_similarity(a: MeanMapVector, b: MeanMapVector) -> float:
    """Dot product of two mean maps; constant time in the source set sizes."""
    if a.kernel_tag != b.kernel_tag:
        raise ValueError(f"kernel tag mismatch: {a.kernel_tag!r} vs {b.kernel_tag!r}")
    if a.dimension != b.dimension:
        raise ValueError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    return float(a.values @ b.values)


def normalized_similarity(a: MeanMapVector, b: MeanMapVector) -> float:
    """Cosine of two mean maps, in [0, 1] for nonnegative features."""
    na, nb = a.norm(), b.norm()
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for a zero mean map")
    return idk_similarity(a, b) / (na * nb)


@dataclass(frozen=True)
class GDKParams:
    """Gaussian kernel bandwidth plus Nystrom sample/rank sizes."""

    gamma: float
    nystrom_samples: int = 1024
    nystrom_rank: int = 1024
    rng_seed: int = 0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not (1 <= self.nystrom_rank <= self.nystrom_samples):
            raise ValueError("need 1 <= nystrom_rank <= nystrom_samples")


def gaussian_kernel(X: np.ndarray, Y: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * ||x - y||^2) for all pairs."""
    return np.exp(-gamma * cdist(np.atleast_2d(X), np.atleast_2d(Y), "sqeuclidean"))


def median_heuristic_gamma(points: np.ndarray, max_points: int = 1000, rng_seed: int = 0) -> float:
    """Bandwidth gamma = 1 / (2 * median^2) of pairwise distances on a subsample."""
    pts = np.asarray(points, dtype=float)
    if len(pts) > max_points:
        idx = np.random.default_rng(rng_seed).choice(len(pts), size=max_points, replace=False)
        pts = pts[np.sort(idx)]
    d = cdist(pts, pts)
    pos = d[np.triu_indices(len(pts), k=1)]
    pos = pos[pos > 0]
    if len(pos) == 0:
        return 1.0
    med = float(np.median(pos))
    return 1.0 / (2.0 * med * med)


class NystromMap:
    """Low-rank Gaussian kernel feature map built from sampled landmarks.

    z(x) = k(x, landmarks) @ U diag(lambda)^(-1/2), so <z(x), z(y)> approximates
    the Gaussian kernel and reproduces it exactly on the landmarks at full rank.
    """

    def __init__(self, landmarks: np.ndarray, weights: np.ndarray, params: GDKParams):
        landmarks = np.asarray(landmarks, dtype=float)
        weights = np.asarray(weights, dtype=float)
        landmarks.setflags(write=False)
        weights.setflags(write=False)
        self.landmarks = landmarks
        self.weights = weights  # (m, rank)
        self.params = params

    @property
    def dims(self) -> int:
        return self.landmarks.shape[1]

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[1]

    def point_features(self, X: np.ndarray) -> np.ndarray:
        """Approximate feature vectors z(x), shape (n, rank)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dims:
            raise ValueError(f"point dimension {X.shape[1]} != map dimension {self.dims}")
        return gaussian_kernel(X, self.landmarks, self.params.gamma) @ self.weights

    transform = point_features


def gdk_fit_nystrom(points: np.ndarray, params: GDKParams) -> NystromMap:
    """Fit a Nystrom feature map on sampled landmark points.

    The landmark kernel matrix gets a 1e-10 ridge before eigendecomposition;
    eigenvalues below 1e-12 are truncated along with anything past the
    requested rank.
    """
    pts = np.asarray(points, dtype=float)
    m = params.nystrom_samples
    if len(pts) < m:
        raise ValueError(f"need at least {m} points to sample {m} landmarks, got {len(pts)}")
    rng = np.random.default_rng(params.rng_seed)
    idx = np.sort(rng.choice(len(pts), size=m, replace=False))
    landmarks = pts[idx]
    K = gaussian_kernel(landmarks, landmarks, params.gamma)
    K[np.diag_indices_from(K)] += 1e-10
    eigval, eigvec = np.linalg.eigh(K)
    order = np.argsort(eigval)[::-1][: params.nystrom_rank]
    keep = order[eigval[order] > 1e-12]
    weights = eigvec[:, keep] / np.sqrt(eigval[keep])
    return NystromMap(landmarks=landmarks, weights=weights, params=params)


def embed_set_gdk(nmap: NystromMap, pts: np.ndarray) -> MeanMapVector:
    """Average Nystrom feature map over a point set."""
    pts = np.asarray(pts, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValueError("point set must be a non-empty (n, d) array")
    z = nmap.point_features(pts)
    return MeanMapVector(values=z.mean(axis=0), source_size=len(pts), kernel_tag="gdk_nystrom")


def gdk_set_similarity_exact(S: np.ndarray, T: np.ndarray, gamma: float) -> float:
    """Exact Gaussian set similarity: mean of the full pairwise kernel matrix."""
    return float(gaussian_kernel(S, T, gamma).mean())
