"""Synthetic label traces and their (private) clustering."""

from edgeagg.traces.generate import TraceConfig, TraceDataset, generate_traces, random_walks
from edgeagg.traces.io import load_dataset, save_dataset
from edgeagg.traces.kmeans import ClusterModel, dp_kmeans_central, kmeans_baseline, nearest
from edgeagg.traces.lsh import (
    FIXED_POINT_SCALE,
    ClusteringFailure,
    LshEncoding,
    PublicStructures,
    assign_buckets,
    identity_structures,
    lsh_client_encode,
    lsh_server_decode,
    make_public_structures,
)
from edgeagg.traces.metrics import clustering_accuracy, match_centers

__all__ = [
    "FIXED_POINT_SCALE",
    "ClusterModel",
    "ClusteringFailure",
    "LshEncoding",
    "PublicStructures",
    "TraceConfig",
    "TraceDataset",
    "assign_buckets",
    "clustering_accuracy",
    "dp_kmeans_central",
    "generate_traces",
    "identity_structures",
    "kmeans_baseline",
    "lsh_client_encode",
    "load_dataset",
    "lsh_server_decode",
    "make_public_structures",
    "match_centers",
    "nearest",
    "random_walks",
    "save_dataset",
]
