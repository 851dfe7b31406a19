"""Per-client cost benchmarks for secret sharing, PRG expansion and whole rounds.

Per-client figures come from an ego simulation: one real client runs the
full protocol against stand-in neighbours that each know only that client.
Every message the measured client sends or receives has the same size as
in a full round without dropouts, so its byte count and its own sharing and
PRG work are exact while the cost of simulating everyone else disappears.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, replace

import numpy as np

from edgeagg.fieldvec import MaskVector
from edgeagg.secsum.client import ClientRoundState
from edgeagg.secsum.config import RoundConfig
from edgeagg.secsum.graph import NeighborGraph, build_neighbor_graph
from edgeagg.secsum.messages import UnmaskRequest
from edgeagg.secsum.server import server_run_round
from edgeagg.secsum.transport import ByteAccountant, InProcessTransport

FULL_ROUND_LIMIT = 1_000


@dataclass(frozen=True)
class ClientCost:
    client: int
    degree: int
    bytes_sent: int
    bytes_received: int
    sharing_time: float
    prg_time: float

    @property
    def bytes_total(self) -> int:
        return self.bytes_sent + self.bytes_received


@dataclass(frozen=True)
class BenchRow:
    users: int
    neighbours: int
    mean_degree: float
    sharing: float
    prg: float
    total: float | None
    bytes_per_client: float
    repetitions: int
    low_confidence: bool

    def as_dict(self) -> dict:
        return {
            "users": self.users,
            "neighbours": self.neighbours,
            "mean_degree": round(self.mean_degree, 2),
            "sharing": self.sharing,
            "prg": self.prg,
            "total": self.total,
            "bytes_per_client": self.bytes_per_client,
            "repetitions": self.repetitions,
            "low_confidence": self.low_confidence,
        }


def measure_client(config: RoundConfig, graph: NeighborGraph, client: int, seed: int = 0) -> ClientCost:
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence([seed, client]).spawn(graph.degree(client) + 1)]
    acct = ByteAccountant()
    tr = InProcessTransport(acct)
    me = ClientRoundState(client, graph.neighbors(client), rngs[0])
    # stand-ins only need a threshold they can meet with a single neighbour
    stand_cfg = replace(config, t=None, threshold_fraction=None)
    stand = [ClientRoundState(j, (client,), rng) for j, rng in zip(graph.neighbors(client), rngs[1:])]

    my_advert = tr.upload(client, me.advertise(config))
    relayed = [tr.download(client, s.advertise(stand_cfg)) for s in stand]
    their_shares = [s.distribute_shares([my_advert], stand_cfg) for s in stand]
    tr.upload(client, me.distribute_shares(relayed, config))
    incoming = [tr.download(client, es.for_recipient(client)) for es in their_shares]
    me.receive_shares(incoming, config)
    tr.upload(client, me.mask_input(MaskVector.zeros(config.vec_len), config))
    request = UnmaskRequest(config.round_id, client, dropped=(), survivors=me.neighbors)
    tr.upload(client, me.unmask_respond(tr.download(client, request)))
    return ClientCost(
        client=client,
        degree=graph.degree(client),
        bytes_sent=acct.bytes_sent[client],
        bytes_received=acct.bytes_received[client],
        sharing_time=me.sharing_time,
        prg_time=me.prg_time,
    )


def bench_primitives(
    config: RoundConfig,
    repetitions: int = 3,
    sample_clients: int = 3,
    full_round: bool | None = None,
    seed: int = 0,
) -> BenchRow:
    """Median per-client sharing and PRG time, per-client bytes, and round time.

    ``full_round=None`` runs complete rounds only up to ``FULL_ROUND_LIMIT``
    clients; above that ``total`` is reported as None.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    if full_round is None:
        full_round = config.n <= FULL_ROUND_LIMIT
    costs: list[ClientCost] = []
    totals: list[float] = []
    degrees: list[float] = []
    for rep in range(repetitions):
        graph = build_neighbor_graph(config.n, config.k, seed + rep)
        degrees.append(float(graph.degrees().mean()))
        picks = np.random.default_rng([seed, rep]).choice(config.n, size=min(sample_clients, config.n), replace=False)
        for c in picks:
            costs.append(measure_client(config, graph, int(c), seed=seed + rep))
        if full_round:
            zeros = [MaskVector.zeros(config.vec_len)] * config.n
            _, report = server_run_round(config, zeros, graph=graph, seed=seed + rep)
            totals.append(report.total_time)
    return BenchRow(
        users=config.n,
        neighbours=config.k,
        mean_degree=statistics.mean(degrees),
        sharing=statistics.median(c.sharing_time for c in costs),
        prg=statistics.median(c.prg_time for c in costs),
        total=statistics.median(totals) if totals else None,
        bytes_per_client=statistics.median(c.bytes_total for c in costs),
        repetitions=repetitions,
        low_confidence=repetitions == 1,
    )


def format_table(rows: list[BenchRow]) -> str:
    lines = [f"{'Users':>8} {'Neighbours':>10} {'Sharing':>10} {'PRG Eval':>10} {'Total':>10} {'KiB/client':>11}"]
    for r in rows:
        total = "-" if r.total is None else f"{r.total:.3f}"
        flag = " *" if r.low_confidence else ""
        lines.append(
            f"{r.users:>8} {r.neighbours:>10} {r.sharing:>10.5f} {r.prg:>10.5f} {total:>10} {r.bytes_per_client / 1024:>11.1f}{flag}"
        )
    if any(r.low_confidence for r in rows):
        lines.append("* single repetition, low confidence")
    return "\n".join(lines)
