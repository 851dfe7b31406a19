"""Simulation, benchmarking and publishing around secure summation."""

from edgeagg.harness.bench import BenchRow, bench_primitives, measure_client
from edgeagg.harness.cluster import ClusteringParams, central_pooled_pipeline, run_distributed_clustering
from edgeagg.harness.config import DropoutConfig, SimConfig, load_sim_config
from edgeagg.harness.publish import PublishedResult, ResultServer, publish
from edgeagg.harness.simulate import SummationService, client_histograms, run_simulation

__all__ = [
    "BenchRow",
    "ClusteringParams",
    "DropoutConfig",
    "PublishedResult",
    "ResultServer",
    "SimConfig",
    "SummationService",
    "bench_primitives",
    "central_pooled_pipeline",
    "client_histograms",
    "load_sim_config",
    "measure_client",
    "publish",
    "run_distributed_clustering",
    "run_simulation",
]
