from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NeighborGraph:
    """Symmetric client adjacency; ``adjacency[i]`` is a sorted tuple of ids."""

    adjacency: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.adjacency)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency])

    def is_symmetric(self) -> bool:
        return all(i in self.adjacency[j] for i, adj in enumerate(self.adjacency) for j in adj)


def build_neighbor_graph(n: int, k: int, graph_seed: int) -> NeighborGraph:
    """Every client picks ``k`` distinct others; edges are then symmetrized.

    Clients are placed on a ring in a random order and each one links to
    the clients at ``k`` distinct random offsets ahead of it. Each client's
    out-set is a uniformly random ``k``-subset of the others, and every
    client is also picked exactly ``k`` times, so degrees land in
    ``[k, 2k]``. Plain independent picks would give binomial in-degrees
    that overshoot ``2k``.
    """
    if n < 1:
        raise ValueError("need at least one client")
    if k < 0:
        raise ValueError("k must be non-negative")
    if k >= n and not (n == 1 and k == 0):
        raise ValueError(f"degree target k={k} must be below n={n}")
    rng = np.random.default_rng(graph_seed)
    order = rng.permutation(n)
    offsets = rng.choice(n - 1, size=k, replace=False) + 1 if k else np.zeros(0, dtype=np.int64)
    adj: list[set[int]] = [set() for _ in range(n)]
    for pos in range(n):
        i = int(order[pos])
        for off in offsets:
            j = int(order[(pos + off) % n])
            adj[i].add(j)
            adj[j].add(i)
    if any(len(a) > 255 for a in adj):
        raise ValueError("a client degree exceeds 255 shares")
    return NeighborGraph(tuple(tuple(sorted(a)) for a in adj))
