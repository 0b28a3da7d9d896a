"""trajkit: trajectory similarity and clustering via distributional kernels."""

from .baselines import DistanceMatrix, dtw, hausdorff, pairwise_matrix
from .data import (
    DatasetFormatError,
    Trajectory,
    TrajectoryDataset,
    augment_order_dimension,
    downsample,
    load_dataset,
    min_max_normalize,
    save_dataset,
)
from .dkernel import (
    GDKParams,
    MeanMapVector,
    NystromMap,
    embed_set_gdk,
    embed_set_idk,
    embed_sets,
    gdk_fit_nystrom,
    idk_similarity,
    median_heuristic_gamma,
    normalized_similarity,
)
from .evaluation import PrecisionCurve, ari, nmi, precision_at_k, run_sampling_sweep
from .ikernel import IKParams, InsufficientPointsError, IsolationKernelModel, SparseFeatureVector
from .synth import SyntheticSpec, default_backbones, generate_synthetic, parse_synth_config
from .tidkc import (
    ClusteringResult,
    ClusterState,
    TidkcParams,
    cluster,
    embed_level1,
    final_assign,
    grow_clusters,
    select_seeds,
)

__version__ = "0.1.0"

__all__ = [
    "DatasetFormatError",
    "DistanceMatrix",
    "GDKParams",
    "IKParams",
    "InsufficientPointsError",
    "IsolationKernelModel",
    "MeanMapVector",
    "NystromMap",
    "PrecisionCurve",
    "SparseFeatureVector",
    "SyntheticSpec",
    "Trajectory",
    "TrajectoryDataset",
    "TidkcParams",
    "ClusterState",
    "ClusteringResult",
    "ari",
    "augment_order_dimension",
    "cluster",
    "default_backbones",
    "downsample",
    "dtw",
    "embed_level1",
    "embed_set_gdk",
    "embed_set_idk",
    "embed_sets",
    "final_assign",
    "gdk_fit_nystrom",
    "generate_synthetic",
    "grow_clusters",
    "hausdorff",
    "idk_similarity",
    "load_dataset",
    "median_heuristic_gamma",
    "min_max_normalize",
    "nmi",
    "normalized_similarity",
    "pairwise_matrix",
    "parse_synth_config",
    "precision_at_k",
    "run_sampling_sweep",
    "save_dataset",
    "select_seeds",
    "__version__",
]
