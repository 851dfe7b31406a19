"""Synthetic label traces from random walks over the label alphabet.

Two kinds of traces are produced. Routine traces are noisy copies of a
small number of base walks shared by the population; noise traces are
fresh independent walks. A walk starts at a uniform label and moves one
label down, stays, or moves one label up with equal probability,
reflecting at the ends of the alphabet. Label ``a`` is embedded as
``a / (num_labels - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TraceConfig:
    num_labels: int = 10
    trace_len: int = 24
    num_routines: int = 5
    routine_fraction: float = 0.8
    perturbation_std: float = 0.05
    n_walks: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.num_labels < 2:
            raise ValueError("need at least two labels")
        if self.trace_len < 1:
            raise ValueError("trace_len must be positive")
        if self.num_routines < 1:
            raise ValueError("need at least one routine")
        if not 0 < self.routine_fraction <= 1:
            raise ValueError("routine_fraction must lie in (0, 1]")
        if self.perturbation_std < 0:
            raise ValueError("perturbation_std must be non-negative")
        if self.n_walks < 1:
            raise ValueError("n_walks must be positive")

    @property
    def noise_fraction(self) -> float:
        return 1.0 - self.routine_fraction


@dataclass(frozen=True)
class TraceDataset:
    points: np.ndarray  # (n_walks, trace_len), values in [0, 1]
    is_routine: np.ndarray  # (n_walks,) bool
    routine_id: np.ndarray  # (n_walks,) int, -1 for noise traces
    bases: np.ndarray  # (num_routines, trace_len)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def routine_count(self) -> int:
        return int(self.is_routine.sum())


def random_walks(count: int, num_labels: int, length: int, rng: np.random.Generator) -> np.ndarray:
    """Integer label walks of shape ``(count, length)``."""
    labels = np.empty((count, length), dtype=np.int64)
    labels[:, 0] = rng.integers(0, num_labels, size=count)
    steps = rng.integers(-1, 2, size=(count, length - 1))
    top = num_labels - 1
    for s in range(1, length):
        nxt = labels[:, s - 1] + steps[:, s - 1]
        # reflect at both ends
        nxt = np.where(nxt < 0, 1, nxt)
        nxt = np.where(nxt > top, top - 1, nxt)
        labels[:, s] = nxt
    return labels


def generate_traces(config: TraceConfig) -> TraceDataset:
    rng = np.random.default_rng(config.seed)
    scale = 1.0 / (config.num_labels - 1)
    bases = random_walks(config.num_routines, config.num_labels, config.trace_len, rng) * scale

    n = config.n_walks
    is_routine = rng.random(n) < config.routine_fraction
    routine_id = np.where(is_routine, rng.integers(0, config.num_routines, size=n), -1)

    points = random_walks(n, config.num_labels, config.trace_len, rng) * scale
    idx = np.flatnonzero(is_routine)
    jitter = rng.normal(0.0, config.perturbation_std, size=(len(idx), config.trace_len))
    points[idx] = np.clip(bases[routine_id[idx]] + jitter, 0.0, 1.0)
    return TraceDataset(points=points, is_routine=is_routine, routine_id=routine_id, bases=bases)
