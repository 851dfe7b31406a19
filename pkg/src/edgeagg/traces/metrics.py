from __future__ import annotations

import numpy as np

from edgeagg.traces.generate import TraceDataset
from edgeagg.traces.kmeans import ClusterModel, nearest


def match_centers(centers: np.ndarray, bases: np.ndarray) -> dict[int, int]:
    """Greedy one-to-one matching of routines to centers by ascending distance."""
    dist = np.linalg.norm(bases[:, None, :] - centers[None, :, :], axis=2)
    order = np.argsort(dist, axis=None, kind="stable")
    matched: dict[int, int] = {}
    used: set[int] = set()
    for flat in order:
        r, c = divmod(int(flat), centers.shape[0])
        if r in matched or c in used:
            continue
        matched[r] = c
        used.add(c)
        if len(matched) == min(len(bases), len(centers)):
            break
    return matched


def clustering_accuracy(model: ClusterModel, truth: TraceDataset) -> float:
    """Fraction of routine traces whose nearest center is the one matched to their routine.

    Noise traces do not enter the denominator.
    """
    if model.k < 1:
        raise ValueError("model has no centers")
    mask = truth.is_routine
    if not mask.any():
        raise ValueError("ground truth contains no routine traces")
    matched = match_centers(np.asarray(model.centers, dtype=float), truth.bases)
    target = np.array([matched.get(int(r), -1) for r in truth.routine_id[mask]])
    got = nearest(truth.points[mask], np.asarray(model.centers, dtype=float))
    return float(np.mean(got == target))
