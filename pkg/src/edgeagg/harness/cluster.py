"""Distributed clustering of traces with two secure-summation rounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from edgeagg.dpcore import PrivacyParams
from edgeagg.fieldvec import EncodingParams, decode_sum, encode_counts
from edgeagg.harness.simulate import SummationService
from edgeagg.secsum.config import PRESET_DEGREES, RoundConfig, round_id_from
from edgeagg.secsum.server import RoundReport
from edgeagg.traces.generate import TraceConfig, TraceDataset, generate_traces
from edgeagg.traces.kmeans import ClusterModel
from edgeagg.traces.lsh import PublicStructures, lsh_client_encode, lsh_server_decode, make_public_structures
from edgeagg.traces.metrics import clustering_accuracy


@dataclass(frozen=True)
class ClusteringParams:
    n_clients: int = 100
    k: int = 5
    degree: int | None = None
    d_proj: int = 4
    n_refs: int = 64
    min_count: float = 200.0
    epsilon: float = 1.0
    theta: float = 0.0
    public_seed: int = 1
    seed: int = 0
    value_bound: int = 1 << 44
    transport: str = "in_process"

    def graph_degree(self) -> int:
        if self.degree is not None:
            return self.degree
        if self.n_clients == 1:
            return 0
        return PRESET_DEGREES.get(self.n_clients, min(self.n_clients - 1, 20))


@dataclass
class ClusteringResult:
    model: ClusterModel
    reports: tuple[RoundReport, RoundReport]
    rounds: int
    accuracy: float
    dataset: TraceDataset


def split_among_clients(ds: TraceDataset, n_clients: int) -> list[np.ndarray]:
    return np.array_split(ds.points, n_clients)


def client_privacy(params: ClusteringParams, points_per_client: int) -> PrivacyParams:
    if np.isinf(params.epsilon):
        return PrivacyParams.noiseless(cap_c=points_per_client)
    return PrivacyParams(epsilon=params.epsilon, theta=params.theta, cap_c=points_per_client)


def central_pooled_pipeline(ds: TraceDataset, public: PublicStructures, params: ClusteringParams) -> ClusterModel:
    """Noiseless reference: encode all points in one place and decode directly."""
    enc = lsh_client_encode(ds.points, public, PrivacyParams.noiseless(cap_c=len(ds.points)))
    return lsh_server_decode(enc.assign_histogram, enc.bucket_sums, params.min_count, params.k, seed=params.seed)


def run_distributed_clustering(
    trace_config: TraceConfig,
    params: ClusteringParams,
    service: SummationService | None = None,
) -> ClusteringResult:
    ds = generate_traces(trace_config)
    d = ds.points.shape[1]
    public = make_public_structures(params.public_seed, d, params.d_proj, params.n_refs)
    shards = split_among_clients(ds, params.n_clients)
    privacy = client_privacy(params, max(len(s) for s in shards))
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(params.seed).spawn(params.n_clients)]
    encodings = [lsh_client_encode(pts, public, privacy, rng) for pts, rng in zip(shards, rngs)]

    service = service or SummationService(params.transport)
    start_rounds = service.rounds
    m = params.n_refs
    results = []
    for name, vec_len, extract in (
        ("histogram", m, lambda e: e.histogram_vector()),
        ("bucket-sums", m * d, lambda e: e.sums_vector()),
    ):
        enc_params = EncodingParams(vec_len, params.value_bound)
        enc_params.check_contributors(params.n_clients)
        rc = RoundConfig(
            n=params.n_clients,
            k=params.graph_degree(),
            vec_len=vec_len,
            round_id=round_id_from(f"cluster/{name}/{params.seed}"),
            theta=params.theta,
        )
        inputs = [encode_counts(extract(e), enc_params) for e in encodings]
        total, report = service.run(rc, inputs, graph_seed=params.seed, seed=params.seed)
        report.decoded = decode_sum(total, enc_params, len(report.included_clients))
        results.append(report)

    hist = np.array(results[0].decoded, dtype=np.int64)
    sums = np.array(results[1].decoded, dtype=np.int64).reshape(m, d)
    model = lsh_server_decode(hist, sums, params.min_count, params.k, seed=params.seed)
    return ClusteringResult(
        model=model,
        reports=(results[0], results[1]),
        rounds=service.rounds - start_rounds,
        accuracy=clustering_accuracy(model, ds),
        dataset=ds,
    )
