"""Honest-but-curious coordinator for one secure-summation round."""

from __future__ import annotations

import enum
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from edgeagg import shamir
from edgeagg.fieldvec import MaskVector, prg_expand
from edgeagg.secsum import crypto
from edgeagg.secsum.client import ClientRoundState, Phase, ProtocolViolation
from edgeagg.secsum.config import RoundConfig
from edgeagg.secsum.graph import NeighborGraph, build_neighbor_graph
from edgeagg.secsum.messages import MASK_KEY, SELF_SEED, KeyAdvert, MaskedInput, UnmaskRequest, UnmaskResponse
from edgeagg.secsum.transport import ByteAccountant, InProcessTransport


class DropPoint(enum.IntEnum):
    """Phase boundary after which a simulated client goes silent."""

    AFTER_KEYS = 1
    AFTER_SHARES = 2
    AFTER_MASKING = 3


class RoundFailure(RuntimeError):
    def __init__(self, phase: str, message: str, missing: dict[int, tuple[int, int]] | None = None):
        super().__init__(f"[{phase}] {message}")
        self.phase = phase
        # client -> (shares collected, shares required)
        self.missing = missing or {}


@dataclass
class ServerLedger:
    """What the coordinator has seen so far in a round."""

    graph: NeighborGraph
    config: RoundConfig
    adverts: dict[int, KeyAdvert] = field(default_factory=dict)
    shared: set[int] = field(default_factory=set)
    # owner -> clients that were handed the owner's encrypted shares
    holders: dict[int, set[int]] = field(default_factory=lambda: defaultdict(set))
    aborted: dict[int, str] = field(default_factory=dict)

    def threshold(self, client: int) -> int:
        return self.config.threshold_for(self.graph.degree(client))


@dataclass
class RoundReport:
    n: int
    included_clients: tuple[int, ...]
    dropped: dict[int, str]
    bytes_sent: dict[int, int]
    bytes_received: dict[int, int]
    phase_times: dict[str, float]
    sharing_time: dict[int, float]
    prg_time: dict[int, float]
    total_time: float
    aggregate: MaskVector | None = None
    decoded: list[int] | None = None
    transport: str = "in_process"

    def client_bytes(self, client: int) -> int:
        return self.bytes_sent.get(client, 0) + self.bytes_received.get(client, 0)

    def timing_free(self) -> dict:
        """The report with wall-clock fields stripped, for determinism checks."""
        return {
            "n": self.n,
            "included_clients": self.included_clients,
            "dropped": dict(self.dropped),
            "bytes_sent": dict(self.bytes_sent),
            "bytes_received": dict(self.bytes_received),
            "aggregate": None if self.aggregate is None else self.aggregate.to_bytes(),
            "decoded": self.decoded,
        }


def server_recover_and_unmask(
    masked_inputs: Mapping[int, MaskVector],
    responses: Sequence[UnmaskResponse],
    ledger: ServerLedger,
    config: RoundConfig,
) -> MaskVector:
    """Strip every mask from the sum of included inputs.

    Self masks of included clients come from reconstructed seeds; pairwise
    masks between included clients and clients that dropped after sharing
    are recomputed from the dropped clients' reconstructed mask keys. All
    preconditions are checked before any arithmetic: a missing recovery
    raises ``RoundFailure`` and no partial sum is ever produced.
    """
    included = set(masked_inputs)
    if not included:
        raise RoundFailure("unmask", "no masked inputs arrived")
    dropped = ledger.shared - included
    graph = ledger.graph

    seed_shares: dict[int, dict[int, shamir.Share]] = defaultdict(dict)
    key_shares: dict[int, dict[int, shamir.Share]] = defaultdict(dict)
    own_seeds: dict[int, bytes] = {}
    for resp in responses:
        for owner, kind, share in resp.shares:
            if resp.client not in ledger.holders.get(owner, ()):
                raise RoundFailure("unmask", f"client {resp.client} returned a share it never held")
            pool = seed_shares if kind == SELF_SEED else key_shares
            if kind == SELF_SEED and owner not in included or kind == MASK_KEY and owner not in dropped:
                raise RoundFailure("unmask", f"share of kind {kind} for client {owner} is not allowed")
            pool[owner][share.index] = share
        if resp.own_seed is not None:
            if graph.degree(resp.client) != 0:
                raise RoundFailure("unmask", f"client {resp.client} has neighbours but revealed its seed")
            own_seeds[resp.client] = resp.own_seed

    needs_key = {d for d in dropped if any(j in included for j in graph.neighbors(d))}
    missing: dict[int, tuple[int, int]] = {}
    for i in included:
        if graph.degree(i) == 0:
            if i not in own_seeds:
                missing[i] = (0, 1)
        elif len(seed_shares[i]) < ledger.threshold(i):
            missing[i] = (len(seed_shares[i]), ledger.threshold(i))
    for d in needs_key:
        if len(key_shares[d]) < ledger.threshold(d):
            missing[d] = (len(key_shares[d]), ledger.threshold(d))
    if missing:
        raise RoundFailure("recovery", f"insufficient shares for {len(missing)} clients", missing)

    rid, ell = config.round_id, config.vec_len
    acc = np.zeros(ell, dtype=np.uint64)
    for i in included:
        acc += masked_inputs[i].elems
        seed = own_seeds.get(i)
        if seed is None:
            seed = shamir.reconstruct(seed_shares[i].values(), ledger.threshold(i))
        acc -= prg_expand(seed, crypto.self_mask_tag(rid, i), ell).elems
    for d in sorted(needs_key):
        private = shamir.reconstruct(key_shares[d].values(), ledger.threshold(d))
        keys = crypto.KeyPair.from_private(private)
        if keys.public != ledger.adverts[d].mask_public:
            raise RoundFailure("recovery", f"reconstructed key of client {d} does not match its advert")
        for j in graph.neighbors(d):
            if j not in included or j not in ledger.holders[d]:
                continue
            seed = crypto.pairwise_seed(keys, ledger.adverts[j].mask_public, rid, d, j)
            mask = prg_expand(seed, crypto.pair_mask_tag(rid, d, j), ell).elems
            # j added +mask when d > j and -mask when d < j; undo it
            if d > j:
                acc -= mask
            else:
                acc += mask
    return MaskVector(acc)


def _client_rngs(n: int, seed: int | None) -> list[np.random.Generator | None]:
    if seed is None:
        return [None] * n
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def server_run_round(
    config: RoundConfig,
    inputs: Sequence[MaskVector],
    dropout_schedule: Mapping[int, DropPoint] | None = None,
    *,
    graph: NeighborGraph | None = None,
    graph_seed: int = 0,
    seed: int | None = None,
    transport: InProcessTransport | None = None,
) -> tuple[MaskVector, RoundReport]:
    """Run a whole round over simulated clients and return the unmasked sum.

    ``seed`` makes every client's key material reproducible; ``None`` uses
    the OS CSPRNG. The returned sum covers exactly the clients whose masked
    input arrived.
    """
    if len(inputs) != config.n:
        raise ValueError(f"expected {config.n} inputs, got {len(inputs)}")
    for i, y in enumerate(inputs):
        if len(y) != config.vec_len:
            raise ValueError(f"input {i} has length {len(y)}, expected {config.vec_len}")
    schedule = dict(dropout_schedule or {})
    transport = transport or InProcessTransport(ByteAccountant())
    acct = transport.accountant
    t_start = time.perf_counter()
    graph = graph or build_neighbor_graph(config.n, config.k, graph_seed)
    if graph.n != config.n:
        raise ValueError("graph size does not match config.n")
    ledger = ServerLedger(graph=graph, config=config)
    clients = [
        ClientRoundState(i, graph.neighbors(i), rng)
        for i, rng in enumerate(_client_rngs(config.n, seed))
    ]
    phase_times: dict[str, float] = {}

    def alive(c: ClientRoundState, phase: Phase) -> bool:
        return c.phase is phase

    t0 = time.perf_counter()
    for c in clients:
        ledger.adverts[c.client_id] = transport.upload(c.client_id, c.advertise(config))
        if schedule.get(c.client_id) is DropPoint.AFTER_KEYS:
            c.drop()
    phase_times["keys"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    shares = {}
    for c in clients:
        if not alive(c, Phase.KEYS_SENT):
            continue
        me = c.client_id
        relayed = [transport.download(me, ledger.adverts[j]) for j in c.neighbors if j in ledger.adverts]
        try:
            msg = c.distribute_shares(relayed, config)
        except ProtocolViolation as exc:
            c.drop()
            ledger.aborted[me] = str(exc)
            continue
        shares[me] = transport.upload(me, msg)
        if schedule.get(me) is DropPoint.AFTER_SHARES:
            c.drop()
    ledger.shared = set(shares)
    phase_times["shares"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    masked: dict[int, MaskVector] = {}
    for c in clients:
        if not alive(c, Phase.SHARES_SENT):
            continue
        me = c.client_id
        incoming = []
        for j in c.neighbors:
            if j in shares and any(r == me for r, _ in shares[j].ciphertexts):
                incoming.append(transport.download(me, shares[j].for_recipient(me)))
                ledger.holders[j].add(me)
        c.receive_shares(incoming, config)
        reply = transport.upload(me, c.mask_input(inputs[me], config))
        masked[me] = reply.vector
        if schedule.get(me) is DropPoint.AFTER_MASKING:
            c.drop()
    phase_times["masking"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    included = set(masked)
    responses = []
    for c in clients:
        if not alive(c, Phase.MASKED_SENT):
            continue
        me = c.client_id
        held = [j for j in c.neighbors if me in ledger.holders.get(j, ())]
        request = UnmaskRequest(
            config.round_id,
            me,
            dropped=tuple(j for j in held if j in ledger.shared and j not in included),
            survivors=tuple(j for j in held if j in included),
        )
        responses.append(transport.upload(me, c.unmask_respond(transport.download(me, request))))
    phase_times["unmask"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    total = server_recover_and_unmask(masked, responses, ledger, config)
    phase_times["recovery"] = time.perf_counter() - t0

    dropped = {i: DropPoint(p).name.lower() for i, p in schedule.items() if i not in ledger.aborted}
    dropped.update({i: "aborted" for i in ledger.aborted})
    report = RoundReport(
        n=config.n,
        included_clients=tuple(sorted(included)),
        dropped=dict(sorted(dropped.items())),
        bytes_sent={i: acct.bytes_sent.get(i, 0) for i in range(config.n)},
        bytes_received={i: acct.bytes_received.get(i, 0) for i in range(config.n)},
        phase_times=phase_times,
        sharing_time={c.client_id: c.sharing_time for c in clients},
        prg_time={c.client_id: c.prg_time for c in clients},
        total_time=time.perf_counter() - t_start,
        aggregate=total,
        transport=transport.name,
    )
    return total, report


def random_dropout_schedule(n: int, theta_sim: float, rng: np.random.Generator) -> dict[int, DropPoint]:
    """Each client drops with probability ``theta_sim`` at a uniformly chosen boundary."""
    drops = rng.random(n) < theta_sim
    points = rng.integers(1, 4, size=n)
    return {i: DropPoint(int(points[i])) for i in range(n) if drops[i]}
