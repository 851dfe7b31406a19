"""Threshold sharing of short byte strings, bytewise over GF(256).

The field uses the AES reduction polynomial x^8 + x^4 + x^3 + x + 1. Every
byte of the secret gets its own random polynomial; all polynomials are
evaluated at the same point, so one share is an index plus one byte per
secret byte.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_SHARES = 255


def _build_tables() -> tuple[np.ndarray, np.ndarray]:
    exp = np.zeros(512, dtype=np.int64)
    log = np.zeros(256, dtype=np.int64)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        # multiply by the generator 0x03
        x ^= (x << 1) ^ (0x11B if x & 0x80 else 0)
        x &= 0xFF
    exp[255:510] = exp[:255]
    return exp, log


_EXP, _LOG = _build_tables()
_EXP_L, _LOG_L = _EXP.tolist(), _LOG.tolist()


def gf_mul(a, b):
    """Elementwise GF(256) product of uint8-compatible arrays or ints."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out = _EXP[_LOG[a] + _LOG[b]]
    return np.where((a == 0) | (b == 0), 0, out)


def _mul_int(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(_EXP_L[_LOG_L[a] + _LOG_L[b]])


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(256)")
    return int(_EXP[255 - _LOG[a]])


@dataclass(frozen=True)
class Share:
    index: int
    payload: bytes

    def __post_init__(self):
        if not 1 <= self.index <= MAX_SHARES:
            raise ValueError(f"share index must be in 1..{MAX_SHARES}, got {self.index}")

    def to_bytes(self) -> bytes:
        return bytes([self.index]) + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> Share:
        if len(data) < 2:
            raise ValueError("share encoding too short")
        return cls(index=data[0], payload=bytes(data[1:]))


def _random_bytes(rng: np.random.Generator | None, size: int) -> np.ndarray:
    if rng is None:
        return np.frombuffer(secrets.token_bytes(size), dtype=np.uint8).astype(np.int64)
    return rng.integers(0, 256, size=size, dtype=np.int64)


def split(secret: bytes, t: int, m: int, rng: np.random.Generator | None = None) -> list[Share]:
    """Split ``secret`` into ``m`` shares, any ``t`` of which reconstruct it.

    ``rng=None`` draws coefficients from the OS CSPRNG; a seeded generator is
    accepted for reproducible simulations.
    """
    if not secret:
        raise ValueError("secret must be non-empty")
    if m > MAX_SHARES:
        raise ValueError(f"at most {MAX_SHARES} shares, got m={m}")
    if not 1 <= t <= m:
        raise ValueError(f"need 1 <= t <= m, got t={t}, m={m}")
    n_bytes = len(secret)
    coeffs = np.empty((t, n_bytes), dtype=np.int64)
    coeffs[0] = np.frombuffer(secret, dtype=np.uint8)
    if t > 1:
        coeffs[1:] = _random_bytes(rng, (t - 1) * n_bytes).reshape(t - 1, n_bytes)
    xs = np.arange(1, m + 1, dtype=np.int64)[:, None]
    # Horner, highest coefficient first; addition in GF(256) is xor
    acc = np.zeros((m, n_bytes), dtype=np.int64)
    for c in coeffs[::-1]:
        acc = gf_mul(acc, xs) ^ c[None, :]
    return [Share(int(i), acc[i - 1].astype(np.uint8).tobytes()) for i in range(1, m + 1)]


def lagrange_at_zero(indices: Sequence[int]) -> np.ndarray:
    """Lagrange basis coefficients for interpolating at x=0."""
    lam = np.empty(len(indices), dtype=np.int64)
    for j, xj in enumerate(indices):
        num, den = 1, 1
        for k, xk in enumerate(indices):
            if k != j:
                num = _mul_int(num, xk)
                den = _mul_int(den, xj ^ xk)
        lam[j] = _mul_int(num, gf_inv(den))
    return lam


def reconstruct(shares: Iterable[Share], t: int) -> bytes:
    shares = list(shares)
    if t < 1:
        raise ValueError("threshold must be at least 1")
    if len(shares) < t:
        raise ValueError(f"need at least {t} shares, got {len(shares)}")
    indices = [s.index for s in shares]
    if len(set(indices)) != len(indices):
        raise ValueError("duplicate share indices")
    lengths = {len(s.payload) for s in shares}
    if len(lengths) != 1:
        raise ValueError("share payload lengths differ")
    # any t shares determine the degree-(t-1) polynomial
    use = shares[:t]
    lam = lagrange_at_zero([s.index for s in use])
    ys = np.array([np.frombuffer(s.payload, dtype=np.uint8) for s in use], dtype=np.int64)
    terms = gf_mul(lam[:, None], ys)
    return np.bitwise_xor.reduce(terms, axis=0).astype(np.uint8).tobytes()
