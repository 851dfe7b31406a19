"""Mask arithmetic in the additive group of integers mod 2**64.

Signed counts are carried as their two's-complement residues, summed with
machine wrap-around, and decoded back to the centered representative.
Masks are AES-128-CTR keystreams cut into little-endian 64-bit words.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

SEED_BYTES = 16
_TWO63 = 1 << 63


class MaskVector:
    """Immutable vector of uint64 group elements."""

    __slots__ = ("_elems",)

    def __init__(self, elems: Iterable[int] | np.ndarray):
        if isinstance(elems, np.ndarray) and elems.dtype == np.uint64:
            arr = elems.copy()
        else:
            arr = np.array([int(e) % (1 << 64) for e in elems], dtype=np.uint64)
        if arr.ndim != 1:
            raise ValueError("MaskVector must be one-dimensional")
        arr.flags.writeable = False
        self._elems = arr

    @classmethod
    def zeros(cls, length: int) -> MaskVector:
        return cls._wrap(np.zeros(length, dtype=np.uint64))

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> MaskVector:
        # takes ownership of a freshly computed array, no copy
        obj = cls.__new__(cls)
        arr.flags.writeable = False
        obj._elems = arr
        return obj

    @property
    def elems(self) -> np.ndarray:
        return self._elems

    def __len__(self) -> int:
        return len(self._elems)

    def _check(self, other: MaskVector) -> None:
        if not isinstance(other, MaskVector):
            raise TypeError(f"expected MaskVector, got {type(other).__name__}")
        if len(other) != len(self):
            raise ValueError(f"length mismatch: {len(self)} vs {len(other)}")

    def __add__(self, other: MaskVector) -> MaskVector:
        self._check(other)
        return MaskVector._wrap(self._elems + other._elems)

    def __sub__(self, other: MaskVector) -> MaskVector:
        self._check(other)
        return MaskVector._wrap(self._elems - other._elems)

    def __neg__(self) -> MaskVector:
        return MaskVector._wrap(np.uint64(0) - self._elems)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MaskVector):
            return NotImplemented
        return len(self) == len(other) and bool(np.array_equal(self._elems, other._elems))

    def __hash__(self) -> int:
        return hash(self._elems.tobytes())

    def __repr__(self) -> str:
        head = ", ".join(str(int(x)) for x in self._elems[:4])
        more = ", ..." if len(self) > 4 else ""
        return f"MaskVector([{head}{more}], len={len(self)})"

    def to_bytes(self) -> bytes:
        return self._elems.astype("<u8", copy=False).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> MaskVector:
        if len(data) % 8:
            raise ValueError("byte length must be a multiple of 8")
        return cls._wrap(np.frombuffer(data, dtype="<u8").astype(np.uint64))


def vector_sum(vectors: Iterable[MaskVector], length: int) -> MaskVector:
    acc = np.zeros(length, dtype=np.uint64)
    for v in vectors:
        if len(v) != length:
            raise ValueError(f"length mismatch: {len(v)} vs {length}")
        acc += v.elems
    return MaskVector._wrap(acc)


@dataclass(frozen=True)
class EncodingParams:
    vec_len: int
    value_bound: int

    def __post_init__(self):
        if self.vec_len < 1:
            raise ValueError("vec_len must be positive")
        if not 1 <= self.value_bound < _TWO63:
            raise ValueError("value_bound must lie in [1, 2**63)")

    def check_contributors(self, n_contributors: int) -> None:
        """Reject contributor counts whose sums could wrap past the centered range."""
        if n_contributors < 1:
            raise ValueError("need at least one contributor")
        if n_contributors * self.value_bound >= _TWO63:
            raise ValueError(
                f"{n_contributors} contributors x bound {self.value_bound} "
                "overflows the centered decoding range"
            )


def encode_counts(counts: Sequence[int], params: EncodingParams) -> MaskVector:
    arr = np.asarray(counts)
    if arr.ndim != 1 or len(arr) != params.vec_len:
        raise ValueError(f"expected {params.vec_len} counts, got shape {arr.shape}")
    if arr.dtype.kind == "u":
        if np.any(arr > params.value_bound):
            raise ValueError(f"count magnitude exceeds value_bound {params.value_bound}")
    elif arr.dtype.kind != "i":
        if arr.dtype.kind == "O" or not np.all(np.mod(arr, 1) == 0):
            arr = np.array([_as_int(c) for c in arr], dtype=object)
        if np.any(arr > params.value_bound) or np.any(arr < -params.value_bound):
            raise ValueError(f"count magnitude exceeds value_bound {params.value_bound}")
    elif np.any(arr > params.value_bound) or np.any(arr < -params.value_bound):
        raise ValueError(f"count magnitude exceeds value_bound {params.value_bound}")
    return MaskVector._wrap(arr.astype(np.int64).view(np.uint64).copy())


def _as_int(value) -> int:
    if isinstance(value, (int, np.integer)):
        return int(value)
    if float(value).is_integer():
        return int(value)
    raise ValueError(f"counts must be integers, got {value!r}")


def decode_sum(total: MaskVector, params: EncodingParams, n_contributors: int) -> list[int]:
    params.check_contributors(n_contributors)
    if len(total) != params.vec_len:
        raise ValueError(f"expected length {params.vec_len}, got {len(total)}")
    # the int64 view of a uint64 residue is its centered representative
    return [int(x) for x in total.elems.view(np.int64)]


def _nonce(domain_tag: bytes) -> bytes:
    return hashlib.sha256(domain_tag).digest()[:12] + b"\x00\x00\x00\x00"


def prg_expand(seed: bytes, domain_tag: bytes, length: int) -> MaskVector:
    """Expand a 16-byte seed into ``length`` pseudo-random group elements.

    The keystream is AES-128-CTR under ``key=seed``; the counter block is the
    first 12 bytes of SHA-256(domain_tag) followed by a 32-bit counter from 0.
    """
    if len(seed) != SEED_BYTES:
        raise ValueError(f"seed must be {SEED_BYTES} bytes, got {len(seed)}")
    if length < 0:
        raise ValueError("length must be non-negative")
    enc = Cipher(algorithms.AES(seed), modes.CTR(_nonce(domain_tag))).encryptor()
    stream = enc.update(bytes(8 * length)) + enc.finalize()
    return MaskVector._wrap(np.frombuffer(stream, dtype="<u8").astype(np.uint64))
