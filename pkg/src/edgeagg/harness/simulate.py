"""End-to-end histogram aggregation over simulated clients."""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass

import numpy as np

from edgeagg.dpcore import LocalHistogram, clip_histogram, noise_and_encode
from edgeagg.fieldvec import EncodingParams, MaskVector, decode_sum
from edgeagg.harness.config import SimConfig
from edgeagg.harness.publish import PublishedResult, publish
from edgeagg.harness.sources import LabelSource, SyntheticLabelSource
from edgeagg.secsum.config import RoundConfig
from edgeagg.secsum.server import RoundReport, random_dropout_schedule, server_run_round
from edgeagg.secsum.transport import ByteAccountant, make_transport


class SummationService:
    """Runs secure-summation rounds and counts how many were run."""

    def __init__(self, transport: str = "in_process", keep_log: bool = False):
        self.transport = transport
        self.keep_log = keep_log
        self.rounds = 0
        self.accountants: list[ByteAccountant] = []

    def run(self, config: RoundConfig, inputs, dropout_schedule=None, *, graph_seed: int = 0, seed: int | None = None):
        acct = ByteAccountant(keep_log=self.keep_log)
        self.accountants.append(acct)
        with make_transport(self.transport, acct) as tr:
            total, report = server_run_round(
                config, inputs, dropout_schedule, graph_seed=graph_seed, seed=seed, transport=tr
            )
        self.rounds += 1
        return total, report


@dataclass(frozen=True)
class _Streams:
    data: np.random.SeedSequence
    noise: np.random.SeedSequence
    dropout: np.random.SeedSequence
    protocol: int
    graph: int


def _streams(seed: int) -> _Streams:
    data, noise, dropout, proto = np.random.SeedSequence(seed).spawn(4)
    ints = proto.generate_state(2)
    return _Streams(data, noise, dropout, int(ints[0]), int(ints[1]))


def default_source(config: SimConfig) -> SyntheticLabelSource:
    return SyntheticLabelSource.random(config.num_labels, config.seed, config.recordings_per_client, config.bt_mean)


def client_histograms(config: SimConfig, source: LabelSource | None = None) -> list[LocalHistogram]:
    """Raw (unclipped) histograms the simulated clients collect for ``config``."""
    source = source or default_source(config)
    rngs = [np.random.default_rng(s) for s in _streams(config.seed).data.spawn(config.n)]
    return [source(i, rng) for i, rng in enumerate(rngs)]


def run_simulation(
    config: SimConfig,
    source: LabelSource | None = None,
    service: SummationService | None = None,
) -> tuple[PublishedResult, RoundReport]:
    if config.n < 1:
        raise ValueError("need at least one client")
    streams = _streams(config.seed)
    enc = EncodingParams(config.num_labels + 1, config.value_bound)
    enc.check_contributors(config.n)
    rc = config.round_config()

    raw = client_histograms(config, source)
    clipped = [clip_histogram(h, config.privacy) for h in raw]
    noise_rngs = [np.random.default_rng(s) for s in streams.noise.spawn(config.n)]
    inputs: list[MaskVector] = [
        noise_and_encode(h, config.privacy, enc, rng) for h, rng in zip(clipped, noise_rngs)
    ]
    schedule = random_dropout_schedule(config.n, config.dropout.theta_sim, np.random.default_rng(streams.dropout))

    service = service or SummationService(config.transport)
    total, report = service.run(rc, inputs, schedule, graph_seed=streams.graph, seed=streams.protocol)
    decoded = decode_sum(total, enc, max(1, len(report.included_clients)))
    report.decoded = decoded

    result = PublishedResult(
        round_id=rc.round_id.hex(),
        label_names=tuple(config.label_names()),
        aggregate_counts=tuple(decoded[: config.num_labels]),
        bt_aggregate=decoded[config.num_labels],
        n_included=len(report.included_clients),
        epsilon=config.privacy.epsilon,
        theta=float(config.privacy.theta),
        cap_c=config.privacy.cap_c,
        cap_b=config.privacy.cap_b,
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    )
    if config.output_dir is not None:
        publish(result, report, config.output_dir)
    return result, report
