"""Round messages and their binary wire format.

Frame layout::

    u32 LE length | u8 tag | round_id (16 bytes) | body

``length`` counts every byte after the length field itself. All integers in
bodies are little-endian. Vectors are ``vec_len`` u64 words.
"""

from __future__ import annotations

import socket
import struct
from dataclasses import dataclass
from typing import Union

from edgeagg.fieldvec import SEED_BYTES, MaskVector
from edgeagg.secsum.config import ROUND_ID_BYTES
from edgeagg.shamir import Share

TAG_KEY_ADVERT = 1
TAG_ENCRYPTED_SHARES = 2
TAG_MASKED_INPUT = 3
TAG_UNMASK_REQUEST = 4
TAG_UNMASK_RESPONSE = 5

# share kinds inside an UnmaskResponse
SELF_SEED = 0
MASK_KEY = 1

HEADER = struct.Struct("<IB")


class WireError(ValueError):
    pass


@dataclass(frozen=True)
class KeyAdvert:
    round_id: bytes
    client: int
    mask_public: bytes
    enc_public: bytes


@dataclass(frozen=True)
class EncryptedShares:
    round_id: bytes
    client: int
    # (recipient, ciphertext) pairs
    ciphertexts: tuple[tuple[int, bytes], ...]

    def for_recipient(self, recipient: int) -> EncryptedShares:
        kept = tuple((r, c) for r, c in self.ciphertexts if r == recipient)
        return EncryptedShares(self.round_id, self.client, kept)


@dataclass(frozen=True)
class MaskedInput:
    round_id: bytes
    client: int
    vector: MaskVector


@dataclass(frozen=True)
class UnmaskRequest:
    round_id: bytes
    client: int
    dropped: tuple[int, ...]
    survivors: tuple[int, ...]


@dataclass(frozen=True)
class UnmaskResponse:
    round_id: bytes
    client: int
    # (owner, kind, share) with kind SELF_SEED or MASK_KEY
    shares: tuple[tuple[int, int, Share], ...]
    # only an isolated client (no neighbours) reveals its own seed
    own_seed: bytes | None = None


RoundMessage = Union[KeyAdvert, EncryptedShares, MaskedInput, UnmaskRequest, UnmaskResponse]

_TAGS = {
    KeyAdvert: TAG_KEY_ADVERT,
    EncryptedShares: TAG_ENCRYPTED_SHARES,
    MaskedInput: TAG_MASKED_INPUT,
    UnmaskRequest: TAG_UNMASK_REQUEST,
    UnmaskResponse: TAG_UNMASK_RESPONSE,
}


def _ids(ids) -> bytes:
    return struct.pack(f"<I{len(ids)}I", len(ids), *ids)


def _body(msg: RoundMessage) -> bytes:
    if isinstance(msg, KeyAdvert):
        return struct.pack("<I", msg.client) + msg.mask_public + msg.enc_public
    if isinstance(msg, EncryptedShares):
        parts = [struct.pack("<II", msg.client, len(msg.ciphertexts))]
        for recipient, ct in msg.ciphertexts:
            parts.append(struct.pack("<IH", recipient, len(ct)))
            parts.append(ct)
        return b"".join(parts)
    if isinstance(msg, MaskedInput):
        return struct.pack("<II", msg.client, len(msg.vector)) + msg.vector.to_bytes()
    if isinstance(msg, UnmaskRequest):
        return struct.pack("<I", msg.client) + _ids(msg.dropped) + _ids(msg.survivors)
    if isinstance(msg, UnmaskResponse):
        parts = [struct.pack("<II", msg.client, len(msg.shares))]
        for owner, kind, share in msg.shares:
            raw = share.to_bytes()
            parts.append(struct.pack("<IBH", owner, kind, len(raw)))
            parts.append(raw)
        if msg.own_seed is None:
            parts.append(b"\x00")
        else:
            parts.append(b"\x01" + msg.own_seed)
        return b"".join(parts)
    raise TypeError(f"not a round message: {type(msg).__name__}")


def encode_message(msg: RoundMessage) -> bytes:
    if len(msg.round_id) != ROUND_ID_BYTES:
        raise WireError("round_id must be 16 bytes")
    payload = bytes([_TAGS[type(msg)]]) + msg.round_id + _body(msg)
    return struct.pack("<I", len(payload)) + payload


class _Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise WireError("truncated message")
        out = bytes(self.data[self.pos : self.pos + n])
        self.pos += n
        return out

    def unpack(self, fmt: str):
        s = struct.Struct("<" + fmt)
        return s.unpack(self.take(s.size))

    def ids(self) -> tuple[int, ...]:
        (count,) = self.unpack("I")
        return self.unpack(f"{count}I") if count else ()

    def done(self) -> None:
        if self.pos != len(self.data):
            raise WireError(f"{len(self.data) - self.pos} trailing bytes")


def decode_message(frame: bytes) -> RoundMessage:
    if len(frame) < HEADER.size + ROUND_ID_BYTES:
        raise WireError("frame too short")
    length, tag = HEADER.unpack_from(frame)
    if length != len(frame) - 4:
        raise WireError(f"length field {length} does not match frame size {len(frame) - 4}")
    r = _Reader(frame[HEADER.size :])
    round_id = r.take(ROUND_ID_BYTES)
    if tag == TAG_KEY_ADVERT:
        (client,) = r.unpack("I")
        msg = KeyAdvert(round_id, client, r.take(32), r.take(32))
    elif tag == TAG_ENCRYPTED_SHARES:
        client, count = r.unpack("II")
        cts = []
        for _ in range(count):
            recipient, size = r.unpack("IH")
            cts.append((recipient, r.take(size)))
        msg = EncryptedShares(round_id, client, tuple(cts))
    elif tag == TAG_MASKED_INPUT:
        client, size = r.unpack("II")
        msg = MaskedInput(round_id, client, MaskVector.from_bytes(r.take(8 * size)))
    elif tag == TAG_UNMASK_REQUEST:
        (client,) = r.unpack("I")
        msg = UnmaskRequest(round_id, client, r.ids(), r.ids())
    elif tag == TAG_UNMASK_RESPONSE:
        client, count = r.unpack("II")
        shares = []
        for _ in range(count):
            owner, kind, size = r.unpack("IBH")
            shares.append((owner, kind, Share.from_bytes(r.take(size))))
        (flag,) = r.unpack("B")
        own = r.take(SEED_BYTES) if flag else None
        msg = UnmaskResponse(round_id, client, tuple(shares), own)
    else:
        raise WireError(f"unknown message tag {tag}")
    r.done()
    return msg


def read_frame(sock: socket.socket) -> bytes:
    head = _recv_exact(sock, 4)
    (length,) = struct.unpack("<I", head)
    return head + _recv_exact(sock, length)


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(min(n - len(buf), 1 << 20))
        if not chunk:
            raise ConnectionError("connection closed mid-frame")
        buf += chunk
    return bytes(buf)
