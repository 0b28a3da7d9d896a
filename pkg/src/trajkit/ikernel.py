"""Isolation Kernel: data-dependent point similarity via random Voronoi partitionings.

A model holds t independent partitionings, each defined by psi centers sampled
without replacement from the fit set. A point's feature vector is the one-hot
indicator of its nearest center in every partitioning, scaled by 1/sqrt(t), so
the plain dot product of two feature vectors equals the fraction of
partitionings in which the points share a Voronoi cell. Cells are small where
the fit data is dense and large where it is sparse, which makes equal-distance
pairs score higher in sparse regions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

SERIAL_FORMAT_VERSION = 1
_CHUNK = 4096


class InsufficientPointsError(ValueError):
    """Raised when the fit set is smaller than psi."""


@dataclass(frozen=True)
class IKParams:
    """psi centers per partitioning, t partitionings, and the sampling seed."""

    psi: int
    t: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if self.psi < 2:
            raise ValueError(f"psi must be >= 2, got {self.psi}")
        if self.t < 1:
            raise ValueError(f"t must be >= 1, got {self.t}")


@dataclass(frozen=True)
class SparseFeatureVector:
    """One-hot-per-partitioning feature vector, stored as cell indices.

    The dense form has dimension t * psi with exactly t entries of value
    1/sqrt(t) (one in each consecutive psi-block), hence unit norm.
    """

    cells: np.ndarray  # (t,) nearest-center index within each partitioning
    psi: int
    t: int

    @property
    def dimension(self) -> int:
        return self.t * self.psi

    @property
    def active_value(self) -> float:
        return 1.0 / np.sqrt(self.t)

    def active_indices(self) -> np.ndarray:
        return np.arange(self.t) * self.psi + self.cells

    def to_dense(self) -> np.ndarray:
        v = np.zeros(self.dimension)
        v[self.active_indices()] = self.active_value
        return v

    def dot(self, other: "SparseFeatureVector") -> float:
        if self.t != other.t or self.psi != other.psi:
            raise ValueError("feature vectors come from different models")
        return int(np.count_nonzero(self.cells == other.cells)) / self.t


class IsolationKernelModel:
    """Fitted Isolation Kernel: t * psi Voronoi centers drawn from a point set."""

    def __init__(self, params: IKParams, centers: np.ndarray):
        centers = np.asarray(centers, dtype=float)
        if centers.shape[:2] != (params.t, params.psi):
            raise ValueError(f"centers must have shape ({params.t}, {params.psi}, d)")
        centers.setflags(write=False)
        self.params = params
        self.centers = centers
        # flattened (t*psi, d) view plus cached squared norms for the distance scan
        self._flat = centers.reshape(params.t * params.psi, -1)
        self._flat_sq = np.einsum("ij,ij->i", self._flat, self._flat)

    @property
    def dims(self) -> int:
        return self._flat.shape[1]

    @property
    def feature_dim(self) -> int:
        return self.params.t * self.params.psi

    @classmethod
    def fit(cls, points: np.ndarray, params: IKParams) -> "IsolationKernelModel":
        """Sample psi distinct centers per partitioning, uniformly without replacement."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("points must be an (n, d) array")
        n = pts.shape[0]
        if n < params.psi:
            raise InsufficientPointsError(
                f"need at least psi={params.psi} points to fit, got {n}"
            )
        rng = np.random.default_rng(params.rng_seed)
        centers = np.empty((params.t, params.psi, pts.shape[1]))
        for j in range(params.t):
            idx = rng.choice(n, size=params.psi, replace=False)
            centers[j] = pts[idx]
        return cls(params, centers)

    def _check_dims(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dims:
            raise ValueError(f"point dimension {X.shape[1]} != model dimension {self.dims}")
        return X

    def cell_assignments(self, X: np.ndarray) -> np.ndarray:
        """Nearest-center index per partitioning for each point, shape (n, t).

        Ties go to the lowest center index. Distances are scanned in chunks to
        bound memory at O(chunk * t * psi).
        """
        X = self._check_dims(X)
        t, psi = self.params.t, self.params.psi
        out = np.empty((X.shape[0], t), dtype=np.int32)
        for start in range(0, X.shape[0], _CHUNK):
            chunk = X[start : start + _CHUNK]
            x_sq = np.einsum("ij,ij->i", chunk, chunk)
            d2 = x_sq[:, None] + self._flat_sq[None, :] - 2.0 * (chunk @ self._flat.T)
            out[start : start + _CHUNK] = d2.reshape(len(chunk), t, psi).argmin(axis=2)
        return out

    def feature_map(self, x: np.ndarray) -> SparseFeatureVector:
        """Sparse indicator of the Voronoi cell x occupies in each partitioning."""
        cells = self.cell_assignments(np.asarray(x, dtype=float).reshape(1, -1))[0]
        return SparseFeatureVector(cells=cells, psi=self.params.psi, t=self.params.t)

    def point_features(self, X: np.ndarray) -> np.ndarray:
        """Dense (n, t*psi) feature matrix; rows have t entries of 1/sqrt(t)."""
        cells = self.cell_assignments(X)
        n, t = cells.shape
        F = np.zeros((n, self.feature_dim))
        cols = np.arange(t) * self.params.psi + cells
        F[np.arange(n)[:, None], cols] = 1.0 / np.sqrt(t)
        return F

    def similarity(self, x: np.ndarray, y: np.ndarray) -> float:
        """Fraction of partitionings in which x and y share a cell (in [0, 1])."""
        return self.feature_map(x).dot(self.feature_map(y))

    def to_json(self, path) -> None:
        obj = {
            "format_version": SERIAL_FORMAT_VERSION,
            "kind": "isolation_kernel",
            "psi": self.params.psi,
            "t": self.params.t,
            "rng_seed": self.params.rng_seed,
            "dims": self.dims,
            "centers": self.centers.tolist(),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh)

    @classmethod
    def from_json(cls, path) -> "IsolationKernelModel":
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        if obj.get("format_version") != SERIAL_FORMAT_VERSION or obj.get("kind") != "isolation_kernel":
            raise ValueError(f"{path}: not a recognised isolation-kernel model file")
        params = IKParams(psi=obj["psi"], t=obj["t"], rng_seed=obj["rng_seed"])
        return cls(params, np.asarray(obj["centers"], dtype=float))


def fit(points: np.ndarray, params: IKParams) -> IsolationKernelModel:
    return IsolationKernelModel.fit(points, params)


def ik_similarity(model: IsolationKernelModel, x: np.ndarray, y: np.ndarray) -> float:
    return model.similarity(x, y)
