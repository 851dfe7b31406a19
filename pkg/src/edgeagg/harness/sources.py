"""Pluggable per-client label sources.

A label source maps ``(client_id, rng)`` to a raw ``LocalHistogram``. The
synthetic default stands in for on-device scene classification and
Bluetooth scanning.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from edgeagg.dpcore import LocalHistogram


class LabelSource(Protocol):
    def __call__(self, client_id: int, rng: np.random.Generator) -> LocalHistogram: ...


@dataclass(frozen=True)
class SyntheticLabelSource:
    """Each client records ``recordings`` labels from a population-wide mix."""

    label_probs: tuple[float, ...]
    recordings: int = 12
    bt_mean: float = 8.0

    @classmethod
    def random(cls, num_labels: int, seed: int, recordings: int = 12, bt_mean: float = 8.0) -> SyntheticLabelSource:
        probs = np.random.default_rng(seed).dirichlet(np.ones(num_labels))
        return cls(tuple(float(p) for p in probs), recordings, bt_mean)

    def __call__(self, client_id: int, rng: np.random.Generator) -> LocalHistogram:
        counts = rng.multinomial(self.recordings, self.label_probs)
        return LocalHistogram(tuple(int(c) for c in counts), int(rng.poisson(self.bt_mean)))
