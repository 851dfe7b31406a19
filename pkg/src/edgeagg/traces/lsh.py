"""One-round distributed clustering via public projection and reference points.

Clients project their points with a public matrix, bucket each point by its
nearest public reference point, and report a per-bucket count histogram plus
per-bucket coordinate sums. Both structures are plain integer vectors, so
each rides one secure-summation round; the server turns the aggregated
buckets into candidate means and clusters those.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from edgeagg.dpcore import PrivacyParams, sample_discrete_laplace
from edgeagg.traces.kmeans import ClusterModel, kmeans_baseline, nearest

FIXED_POINT_BITS = 16
FIXED_POINT_SCALE = 1 << FIXED_POINT_BITS


class ClusteringFailure(RuntimeError):
    """Server-side decoding produced no usable bucket."""


@dataclass(frozen=True)
class PublicStructures:
    projection: np.ndarray  # (d_proj, d)
    refs: np.ndarray  # (m, d_proj)

    @property
    def m(self) -> int:
        return len(self.refs)


@dataclass(frozen=True)
class LshEncoding:
    assign_histogram: np.ndarray  # (m,) int64
    bucket_sums: np.ndarray  # (m, d) int64, fixed point at FIXED_POINT_SCALE

    def histogram_vector(self) -> np.ndarray:
        return self.assign_histogram

    def sums_vector(self) -> np.ndarray:
        return self.bucket_sums.reshape(-1)


def make_public_structures(seed: int, d: int, d_proj: int, m: int) -> PublicStructures:
    """Gaussian projection scaled by 1/sqrt(d_proj); references uniform in the image of the unit cube."""
    rng = np.random.default_rng(seed)
    proj = rng.normal(0.0, 1.0, size=(d_proj, d)) / np.sqrt(d_proj)
    lo = np.minimum(proj, 0.0).sum(axis=1)
    hi = np.maximum(proj, 0.0).sum(axis=1)
    refs = lo + (hi - lo) * rng.random((m, d_proj))
    return PublicStructures(proj, refs)


def identity_structures(refs: np.ndarray) -> PublicStructures:
    refs = np.asarray(refs, dtype=float)
    return PublicStructures(np.eye(refs.shape[1]), refs)


def to_fixed_point(x: np.ndarray) -> np.ndarray:
    return np.rint(np.asarray(x, dtype=float) * FIXED_POINT_SCALE).astype(np.int64)


def assign_buckets(points: np.ndarray, public: PublicStructures) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != public.projection.shape[1]:
        raise ValueError(
            f"points of shape {points.shape} do not match projection input dim {public.projection.shape[1]}"
        )
    if public.refs.shape[1] != public.projection.shape[0]:
        raise ValueError("reference points do not live in the projected space")
    return nearest(points @ public.projection.T, public.refs)


def lsh_client_encode(
    points: np.ndarray,
    public: PublicStructures,
    privacy: PrivacyParams,
    rng: np.random.Generator | None = None,
) -> LshEncoding:
    """Bucket a client's points and noise every cell of both structures.

    ``privacy.cap_c`` is the per-client point cap: later points beyond it
    are discarded, which bounds the histogram's L1 sensitivity by ``cap_c``
    and the sums' by ``cap_c * d``. Half the budget goes to each structure.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be a 2-D array")
    if np.any(points < 0) or np.any(points > 1):
        raise ValueError("points must lie in [0, 1]^d")
    points = points[: privacy.cap_c]
    labels = assign_buckets(points, public)
    m, d = public.m, points.shape[1]
    hist = np.bincount(labels, minlength=m).astype(np.int64)
    sums = np.zeros((m, d), dtype=np.int64)
    np.add.at(sums, labels, to_fixed_point(points))
    if not privacy.is_noiseless:
        if rng is None:
            raise ValueError("a generator is required when noise is enabled")
        half = privacy.epsilon / 2.0
        inflate = privacy.dropout_factor()
        hist = hist + sample_discrete_laplace(privacy.cap_c / half * inflate, rng, size=m)
        sum_scale = FIXED_POINT_SCALE * privacy.cap_c * d / half * inflate
        sums = sums + sample_discrete_laplace(sum_scale, rng, size=(m, d))
    return LshEncoding(hist, sums)


def lsh_server_decode(
    sum_hist: np.ndarray,
    sum_vecs: np.ndarray,
    min_count: float,
    k: int,
    seed: int = 0,
    iters: int = 50,
) -> ClusterModel:
    """Cluster the bucket means whose aggregated count reaches ``min_count``.

    Bucket means are weighted by their counts. Fewer surviving buckets than
    ``k`` yields that many centers.
    """
    hist = np.asarray(sum_hist, dtype=float)
    sums = np.asarray(sum_vecs, dtype=float)
    if sums.ndim == 1:
        sums = sums.reshape(len(hist), -1)
    if sums.shape[0] != len(hist):
        raise ValueError("histogram and bucket sums disagree on the bucket count")
    keep = (hist >= min_count) & (hist > 0)
    if not keep.any():
        raise ClusteringFailure(f"no bucket reached the minimum count {min_count}")
    counts = hist[keep]
    means = np.clip(sums[keep] / FIXED_POINT_SCALE / counts[:, None], 0.0, 1.0)
    return kmeans_baseline(means, min(k, len(means)), iters=iters, seed=seed, weights=counts)
