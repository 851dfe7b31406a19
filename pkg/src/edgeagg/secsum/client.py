"""Client side of a secure-summation round.

A client advertises two X25519 public keys: one whose agreement yields the
pairwise mask seeds, one whose agreement yields the keys that encrypt shares
in transit. Keeping them separate means recovering a dropped client's mask
key never exposes the shares it was holding for others.
"""

from __future__ import annotations

import enum
import struct
import time
from dataclasses import dataclass, field

import numpy as np

from edgeagg import shamir
from edgeagg.fieldvec import SEED_BYTES, MaskVector, prg_expand
from edgeagg.secsum import crypto
from edgeagg.secsum.config import RoundConfig
from edgeagg.secsum.messages import (
    MASK_KEY,
    SELF_SEED,
    EncryptedShares,
    KeyAdvert,
    MaskedInput,
    UnmaskRequest,
    UnmaskResponse,
)


class Phase(enum.IntEnum):
    INITIAL = 0
    KEYS_SENT = 1
    SHARES_SENT = 2
    MASKED_SENT = 3
    DONE = 4
    DROPPED = 5


class ProtocolViolation(RuntimeError):
    """A message broke the protocol; the receiving client aborts the round."""


_SHARE_PLAIN = struct.Struct("<II")


@dataclass
class ClientRoundState:
    client_id: int
    neighbors: tuple[int, ...]
    rng: np.random.Generator | None = None
    phase: Phase = Phase.INITIAL
    mask_keys: crypto.KeyPair | None = None
    enc_keys: crypto.KeyPair | None = None
    self_seed: bytes | None = None
    pairwise_seeds: dict[int, bytes] = field(default_factory=dict)
    # neighbour -> (mask-key share, self-seed share) held on its behalf
    received_shares: dict[int, tuple[shamir.Share, shamir.Share]] = field(default_factory=dict)
    sharing_time: float = 0.0
    prg_time: float = 0.0
    _adverts: dict[int, KeyAdvert] = field(default_factory=dict, repr=False)
    _share_keys: dict[int, bytes] = field(default_factory=dict, repr=False)
    _revealed_seeds: set[int] = field(default_factory=set, repr=False)
    _revealed_keys: set[int] = field(default_factory=set, repr=False)

    def _require(self, phase: Phase) -> None:
        if self.phase is Phase.DROPPED:
            raise ProtocolViolation(f"client {self.client_id} has dropped out")
        if self.phase is not phase:
            raise ProtocolViolation(f"client {self.client_id}: expected phase {phase.name}, in {self.phase.name}")

    def drop(self) -> None:
        self.phase = Phase.DROPPED

    # -- phase 1 ---------------------------------------------------------

    def advertise(self, config: RoundConfig) -> KeyAdvert:
        self._require(Phase.INITIAL)
        self.mask_keys = crypto.KeyPair.generate(self.rng)
        self.enc_keys = crypto.KeyPair.generate(self.rng)
        self.phase = Phase.KEYS_SENT
        return KeyAdvert(config.round_id, self.client_id, self.mask_keys.public, self.enc_keys.public)

    # -- phase 2 ---------------------------------------------------------

    def distribute_shares(self, neighbor_adverts: list[KeyAdvert], config: RoundConfig) -> EncryptedShares:
        self._require(Phase.KEYS_SENT)
        allowed = set(self.neighbors)
        adverts: dict[int, KeyAdvert] = {}
        for adv in neighbor_adverts:
            if adv.round_id != config.round_id:
                raise ProtocolViolation("advert from another round")
            if adv.client not in allowed or adv.client in adverts:
                raise ProtocolViolation(f"unexpected advert from client {adv.client}")
            adverts[adv.client] = adv
        t = config.threshold_for(len(self.neighbors))
        live = sorted(adverts)
        if len(live) < t:
            raise ProtocolViolation(
                f"client {self.client_id}: {len(live)} neighbour adverts, threshold {t}"
            )
        self._adverts = adverts
        self.self_seed = crypto.random_bytes(self.rng, SEED_BYTES)
        rid = config.round_id
        me = self.client_id

        start = time.perf_counter()
        cts: list[tuple[int, bytes]] = []
        if live:
            key_shares = shamir.split(self.mask_keys.private, t, len(live), self.rng)
            seed_shares = shamir.split(self.self_seed, t, len(live), self.rng)
            self.sharing_time += time.perf_counter() - start
            for j, ks, ss in zip(live, key_shares, seed_shares):
                self.pairwise_seeds[j] = crypto.pairwise_seed(self.mask_keys, adverts[j].mask_public, rid, me, j)
                key = crypto.share_key(self.enc_keys, adverts[j].enc_public, rid, me, j)
                self._share_keys[j] = key
                plain = _SHARE_PLAIN.pack(me, j) + ks.to_bytes() + ss.to_bytes()
                cts.append((j, crypto.seal(key, plain, _aad(rid, me, j), self.rng)))
        self.phase = Phase.SHARES_SENT
        return EncryptedShares(rid, me, tuple(cts))

    # -- phase 3 ---------------------------------------------------------

    def receive_shares(self, messages: list[EncryptedShares], config: RoundConfig) -> None:
        """Decrypt the shares neighbours sent; authentication failures raise ``InvalidTag``."""
        self._require(Phase.SHARES_SENT)
        me = self.client_id
        for msg in messages:
            j = msg.client
            if j not in self._share_keys:
                raise ProtocolViolation(f"shares from non-neighbour {j}")
            entries = [ct for r, ct in msg.ciphertexts if r == me]
            if len(entries) != 1:
                raise ProtocolViolation(f"expected one ciphertext from {j}")
            plain = crypto.open_sealed(self._share_keys[j], entries[0], _aad(config.round_id, j, me))
            sender, recipient = _SHARE_PLAIN.unpack_from(plain)
            if (sender, recipient) != (j, me):
                raise ProtocolViolation("share addressed to someone else")
            body = plain[_SHARE_PLAIN.size :]
            key_share = shamir.Share.from_bytes(body[: 1 + crypto.KEY_BYTES])
            seed_share = shamir.Share.from_bytes(body[1 + crypto.KEY_BYTES :])
            self.received_shares[j] = (key_share, seed_share)

    def mask_input(self, y: MaskVector, config: RoundConfig) -> MaskedInput:
        """Add the self mask and the antisymmetric pairwise masks to ``y``.

        Pairwise masks are only applied towards neighbours whose shares
        arrived, since only those can be corrected for if they later drop.
        """
        self._require(Phase.SHARES_SENT)
        if len(y) != config.vec_len:
            raise ValueError(f"input length {len(y)} != vec_len {config.vec_len}")
        rid, me, ell = config.round_id, self.client_id, config.vec_len
        start = time.perf_counter()
        acc = y.elems + prg_expand(self.self_seed, crypto.self_mask_tag(rid, me), ell).elems
        for j in sorted(self.received_shares):
            mask = prg_expand(self.pairwise_seeds[j], crypto.pair_mask_tag(rid, me, j), ell).elems
            if j > me:
                acc = acc + mask
            else:
                acc = acc - mask
        self.prg_time += time.perf_counter() - start
        self.phase = Phase.MASKED_SENT
        return MaskedInput(rid, me, MaskVector(acc))

    # -- phase 4 ---------------------------------------------------------

    def unmask_respond(self, request: UnmaskRequest) -> UnmaskResponse:
        self._require(Phase.MASKED_SENT)
        dropped, survivors = set(request.dropped), set(request.survivors)
        # the server must never learn both secrets of one client
        if dropped & survivors:
            self.drop()
            raise ProtocolViolation(f"clients {sorted(dropped & survivors)} listed as both dropped and surviving")
        if dropped & self._revealed_seeds or survivors & self._revealed_keys:
            self.drop()
            raise ProtocolViolation("request contradicts shares already revealed this round")
        unknown = (dropped | survivors) - set(self.received_shares) - {self.client_id}
        if unknown:
            self.drop()
            raise ProtocolViolation(f"no shares held for clients {sorted(unknown)}")
        out: list[tuple[int, int, shamir.Share]] = []
        for d in sorted(dropped):
            out.append((d, MASK_KEY, self.received_shares[d][0]))
        for s in sorted(survivors - {self.client_id}):
            out.append((s, SELF_SEED, self.received_shares[s][1]))
        self._revealed_keys |= dropped
        self._revealed_seeds |= survivors
        own = self.self_seed if not self.neighbors else None
        self.phase = Phase.DONE
        return UnmaskResponse(request.round_id, self.client_id, tuple(out), own)


def _aad(round_id: bytes, sender: int, recipient: int) -> bytes:
    return round_id + _SHARE_PLAIN.pack(sender, recipient)
