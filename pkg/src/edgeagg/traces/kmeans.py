"""Lloyd's k-means: a plain baseline and a differentially private variant."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClusterModel:
    centers: np.ndarray  # (k, d)
    weights: np.ndarray  # (k,)

    @property
    def k(self) -> int:
        return len(self.centers)

    def assign(self, points: np.ndarray) -> np.ndarray:
        return nearest(points, self.centers)


def nearest(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Index of the closest center per point; ties go to the lowest index."""
    d2 = (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )
    return np.argmin(d2, axis=1)


def kmeans_plusplus(data: np.ndarray, k: int, rng: np.random.Generator, weights: np.ndarray | None = None) -> np.ndarray:
    n = len(data)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    first = rng.choice(n, p=w / w.sum())
    centers = [data[first]]
    d2 = np.sum((data - data[first]) ** 2, axis=1)
    for _ in range(1, k):
        mass = w * d2
        if mass.sum() <= 0:
            # every point already coincides with a center
            idx = rng.choice(n, p=w / w.sum())
        else:
            idx = rng.choice(n, p=mass / mass.sum())
        centers.append(data[idx])
        d2 = np.minimum(d2, np.sum((data - data[idx]) ** 2, axis=1))
    return np.array(centers, dtype=float)


def kmeans_baseline(
    data: np.ndarray,
    k: int,
    iters: int = 50,
    seed: int = 0,
    weights: np.ndarray | None = None,
    tol: float = 0.0,
) -> ClusterModel:
    """Weighted Lloyd iterations from k-means++ seeding.

    Stops after ``iters`` updates or once the centers move by at most ``tol``.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or len(data) == 0:
        raise ValueError("data must be a non-empty 2-D array")
    if not 1 <= k <= len(data):
        raise ValueError(f"need 1 <= k <= {len(data)}, got {k}")
    w = np.ones(len(data)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (len(data),) or np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be non-negative with positive total")
    rng = np.random.default_rng(seed)
    centers = kmeans_plusplus(data, k, rng, w)
    for _ in range(iters):
        labels = nearest(data, centers)
        mass = np.bincount(labels, weights=w, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, data * w[:, None])
        new = centers.copy()
        filled = mass > 0
        new[filled] = sums[filled] / mass[filled, None]
        shift = np.max(np.abs(new - centers))
        centers = new
        if shift <= tol:
            break
    labels = nearest(data, centers)
    return ClusterModel(centers, np.bincount(labels, weights=w, minlength=k))


def dp_kmeans_central(
    data: np.ndarray,
    k: int,
    epsilon: float,
    iters: int = 5,
    seed: int = 0,
) -> ClusterModel:
    """DP Lloyd iterations on data confined to the unit cube.

    The budget is split evenly over iterations and, within one, evenly
    between the per-cluster counts (sensitivity 1) and the per-cluster
    coordinate sums (L1 sensitivity ``d``). Initial centers are uniform in the
    cube so that seeding spends no budget. A cluster whose noisy count drops
    below one is re-seeded uniformly.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or len(data) == 0:
        raise ValueError("data must be a non-empty 2-D array")
    if np.any(data < 0) or np.any(data > 1):
        raise ValueError("data must lie in [0, 1]^d")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if iters < 1:
        raise ValueError("need at least one iteration")
    d = data.shape[1]
    rng = np.random.default_rng(seed)
    centers = rng.random((k, d))
    half = epsilon / iters / 2.0
    counts = np.zeros(k)
    for _ in range(iters):
        labels = nearest(data, centers)
        counts = np.bincount(labels, minlength=k).astype(float)
        sums = np.zeros((k, d))
        np.add.at(sums, labels, data)
        if not math.isinf(epsilon):
            counts = counts + rng.laplace(0.0, 1.0 / half, size=k)
            sums = sums + rng.laplace(0.0, d / half, size=(k, d))
        ok = counts >= 1.0
        centers = np.where(ok[:, None], np.clip(sums / np.maximum(counts, 1.0)[:, None], 0.0, 1.0), rng.random((k, d)))
    return ClusterModel(centers, np.maximum(counts, 0.0))
