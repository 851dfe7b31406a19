"""Round parameters and the graph-degree presets measured on simulated clients."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction

ROUND_ID_BYTES = 16

# users -> neighbours, for gamma=1/20, delta=1/3, sigma=40, eta=30
SCALE_DEGREES = {1_000: 83, 10_000: 103, 100_000: 109}
# a desk-scale row for quick runs
DESK_DEGREES = {100: 20}
PRESET_DEGREES = {**DESK_DEGREES, **SCALE_DEGREES}

PRESET_NAMES = {
    "table1-1e3": 1_000,
    "table1-1e4": 10_000,
    "table1-1e5": 100_000,
    "desk-1e2": 100,
}


def round_id_from(label: str | bytes) -> bytes:
    if isinstance(label, str):
        label = label.encode()
    return hashlib.sha256(b"edgeagg/round-id/" + label).digest()[:ROUND_ID_BYTES]


@dataclass(frozen=True)
class RoundConfig:
    """Parameters of one secure-summation round.

    ``gamma``, ``sigma`` and ``eta`` are carried for reporting only. ``delta``
    sets the default reconstruction threshold: a client with ``deg`` neighbours
    uses ``t = ceil((1 - delta) * deg / 2)``, half the expected number of
    surviving neighbours when a ``delta`` fraction drops out. Setting ``t``
    fixes the threshold for every client instead.
    """

    n: int
    k: int
    vec_len: int
    round_id: bytes = field(default_factory=lambda: round_id_from("default"))
    t: int | None = None
    threshold_fraction: float | None = None
    gamma: Fraction = Fraction(1, 20)
    delta: Fraction = Fraction(1, 3)
    sigma: int = 40
    eta: int = 30
    theta: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one client")
        if self.n == 1:
            if self.k != 0:
                raise ValueError("a single client has no neighbours; use k=0")
        elif not 1 <= self.k < self.n:
            raise ValueError(f"need 1 <= k < n, got k={self.k}, n={self.n}")
        if self.k > 255:
            raise ValueError("k must not exceed 255 (share index limit)")
        if self.t is not None and not 1 <= self.t <= max(self.k, 1):
            raise ValueError(f"need 1 <= t <= k, got t={self.t}, k={self.k}")
        if self.threshold_fraction is not None and not 0 < self.threshold_fraction <= 1:
            raise ValueError("threshold_fraction must lie in (0, 1]")
        if self.vec_len < 1:
            raise ValueError("vec_len must be positive")
        if len(self.round_id) != ROUND_ID_BYTES:
            raise ValueError(f"round_id must be {ROUND_ID_BYTES} bytes")
        if not 0 <= self.theta < 1:
            raise ValueError("theta must lie in [0, 1)")
        if not 0 <= self.delta < 1:
            raise ValueError("delta must lie in [0, 1)")

    @classmethod
    def preset(cls, n: int, vec_len: int, **overrides) -> RoundConfig:
        if n not in PRESET_DEGREES:
            raise KeyError(f"no degree preset for n={n}; known: {sorted(PRESET_DEGREES)}")
        return cls(n=n, k=PRESET_DEGREES[n], vec_len=vec_len, **overrides)

    def threshold_for(self, degree: int) -> int:
        if degree == 0:
            return 0
        if self.t is not None:
            return self.t
        frac = self.threshold_fraction
        if frac is None:
            frac = float(1 - self.delta) / 2
        return max(1, math.ceil(frac * degree - 1e-9))
