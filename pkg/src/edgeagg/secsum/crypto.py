"""Key agreement, key derivation and share encryption used inside a round."""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from cryptography.hazmat.primitives.serialization import Encoding, NoEncryption, PrivateFormat, PublicFormat

from edgeagg.fieldvec import SEED_BYTES

KEY_BYTES = 32
NONCE_BYTES = 12
TAG_BYTES = 16

INFO_PAIRWISE = b"edgeagg/pairwise-seed"
INFO_SHARE_KEY = b"edgeagg/share-encryption"


def random_bytes(rng: np.random.Generator | None, size: int) -> bytes:
    if rng is None:
        return os.urandom(size)
    return rng.bytes(size)


@dataclass(frozen=True)
class KeyPair:
    private: bytes
    public: bytes
    _sk: X25519PrivateKey = field(repr=False, compare=False, default=None)

    @classmethod
    def generate(cls, rng: np.random.Generator | None = None) -> KeyPair:
        return cls.from_private(random_bytes(rng, KEY_BYTES))

    @classmethod
    def from_private(cls, private: bytes) -> KeyPair:
        sk = X25519PrivateKey.from_private_bytes(private)
        pub = sk.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
        raw = sk.private_bytes(Encoding.Raw, PrivateFormat.Raw, NoEncryption())
        return cls(private=raw, public=pub, _sk=sk)

    def exchange(self, peer_public: bytes) -> bytes:
        return self._sk.exchange(X25519PublicKey.from_public_bytes(peer_public))


def pair_context(round_id: bytes, i: int, j: int) -> bytes:
    lo, hi = (i, j) if i < j else (j, i)
    return round_id + struct.pack("<II", lo, hi)


def derive_key(shared_secret: bytes, info: bytes, context: bytes, length: int = SEED_BYTES) -> bytes:
    return HKDF(algorithm=hashes.SHA256(), length=length, salt=None, info=info + context).derive(shared_secret)


def pairwise_seed(own: KeyPair, peer_public: bytes, round_id: bytes, i: int, j: int) -> bytes:
    return derive_key(own.exchange(peer_public), INFO_PAIRWISE, pair_context(round_id, i, j))


def share_key(own: KeyPair, peer_public: bytes, round_id: bytes, i: int, j: int) -> bytes:
    return derive_key(own.exchange(peer_public), INFO_SHARE_KEY, pair_context(round_id, i, j))


def seal(key: bytes, plaintext: bytes, aad: bytes, rng: np.random.Generator | None = None) -> bytes:
    """AES-GCM: 12-byte nonce prefix, ciphertext, 16-byte tag suffix."""
    nonce = random_bytes(rng, NONCE_BYTES)
    return nonce + AESGCM(key).encrypt(nonce, plaintext, aad)


def open_sealed(key: bytes, blob: bytes, aad: bytes) -> bytes:
    """Raise ``cryptography.exceptions.InvalidTag`` on any tampering."""
    return AESGCM(key).decrypt(blob[:NONCE_BYTES], blob[NONCE_BYTES:], aad)


def self_mask_tag(round_id: bytes, i: int) -> bytes:
    return b"self" + round_id + struct.pack("<I", i)


def pair_mask_tag(round_id: bytes, i: int, j: int) -> bytes:
    return b"pair" + pair_context(round_id, i, j)
