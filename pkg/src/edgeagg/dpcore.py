"""Local noising of client histograms before secure summation.

Each client clips its counts to the sensitivity caps, adds two-sided
geometric (discrete Laplace) noise to every coordinate, and encodes the
result into the summation group. Noise is inflated by ``1 / (1 - theta)``
so that the aggregate over survivors stays private even when a fraction
``theta`` of clients drop out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from edgeagg.fieldvec import EncodingParams, MaskVector, encode_counts


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    # a Fraction keeps the dropout factor exact, e.g. theta=Fraction(1, 3) gives exactly 1.5
    theta: float | Fraction = 0.0
    cap_c: int = 1
    cap_b: int = 1
    # multiply the label scale by the number of label coordinates
    strict_composition: bool = False

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 <= self.theta < 1.0:
            raise ValueError(f"theta must lie in [0, 1), got {self.theta}")
        if self.cap_c < 1 or self.cap_b < 1:
            raise ValueError("caps must be at least 1")

    @classmethod
    def noiseless(cls, cap_c: int = 1, cap_b: int = 1) -> PrivacyParams:
        """Parameters with infinite budget: clipping still applies, noise does not."""
        return cls(epsilon=math.inf, cap_c=cap_c, cap_b=cap_b)

    @property
    def is_noiseless(self) -> bool:
        return math.isinf(self.epsilon)

    def dropout_factor(self) -> float:
        return float(1 / (1 - Fraction(self.theta)))

    def label_scale(self, num_labels: int = 1) -> float:
        scale = self.cap_c / self.epsilon * self.dropout_factor()
        if self.strict_composition:
            scale *= num_labels
        return scale

    def bt_scale(self) -> float:
        return self.cap_b / self.epsilon * self.dropout_factor()


@dataclass(frozen=True)
class LocalHistogram:
    label_counts: tuple[int, ...]
    bt_device_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "label_counts", tuple(int(c) for c in self.label_counts))
        if any(c < 0 for c in self.label_counts) or self.bt_device_count < 0:
            raise ValueError("histogram counts must be non-negative")

    @property
    def num_labels(self) -> int:
        return len(self.label_counts)

    def as_vector(self) -> list[int]:
        return [*self.label_counts, int(self.bt_device_count)]

    def is_clipped(self, params: PrivacyParams) -> bool:
        return all(c <= params.cap_c for c in self.label_counts) and self.bt_device_count <= params.cap_b


def clip_histogram(h: LocalHistogram, params: PrivacyParams) -> LocalHistogram:
    return replace(
        h,
        label_counts=tuple(min(c, params.cap_c) for c in h.label_counts),
        bt_device_count=min(h.bt_device_count, params.cap_b),
    )


def discrete_laplace_variance(scale: float) -> float:
    """Variance 2p / (1 - p)^2 of the two-sided geometric with p = exp(-1/scale)."""
    p = math.exp(-1.0 / scale)
    return 2.0 * p / (1.0 - p) ** 2


def sample_discrete_laplace(scale: float, rng: np.random.Generator, size=None):
    """Draw from P(X = x) proportional to exp(-|x| / scale) on the integers.

    Sampled as the difference of two i.i.d. geometric variables on {0, 1, ...}.
    Returns a Python int when ``size`` is None, else an int64 array.
    """
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    q = -math.expm1(-1.0 / scale)  # 1 - p, accurate for large scales
    g1 = rng.geometric(q, size=size) - 1
    g2 = rng.geometric(q, size=size) - 1
    diff = np.asarray(g1, dtype=np.int64) - np.asarray(g2, dtype=np.int64)
    return int(diff) if size is None else diff


def noise_scales(num_labels: int, params: PrivacyParams) -> list[float]:
    """Per-coordinate noise scales: one per label, then the Bluetooth count."""
    return [params.label_scale(num_labels)] * num_labels + [params.bt_scale()]


def noise_histogram(h: LocalHistogram, params: PrivacyParams, rng: np.random.Generator) -> list[int]:
    if not h.is_clipped(params):
        raise ValueError("histogram exceeds its caps; clip it first")
    values = np.array(h.as_vector(), dtype=np.int64)
    if params.is_noiseless:
        return values.tolist()
    scales = noise_scales(h.num_labels, params)
    noise = np.array([sample_discrete_laplace(s, rng) for s in scales], dtype=np.int64)
    return (values + noise).tolist()


def noise_and_encode(
    h: LocalHistogram,
    params: PrivacyParams,
    enc: EncodingParams,
    rng: np.random.Generator,
) -> MaskVector:
    if enc.vec_len != h.num_labels + 1:
        raise ValueError(f"vec_len {enc.vec_len} != {h.num_labels} labels + 1 device count")
    return encode_counts(noise_histogram(h, params, rng), enc)


def clamp_for_display(values: Sequence[int]) -> list[int]:
    """Clamp negative noisy aggregates at zero for presentation only."""
    return [max(0, int(v)) for v in values]
