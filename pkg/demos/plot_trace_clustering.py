"""
Finding routines in label traces
================================

Synthetic traces are random walks over a label alphabet; most are noisy
copies of a few routines. Clustering should recover the routines, less
well as the privacy budget shrinks.
"""

import math

import numpy as np
import matplotlib.pyplot as plt

from edgeagg.harness import ClusteringParams, run_distributed_clustering
from edgeagg.traces import TraceConfig, clustering_accuracy, dp_kmeans_central, generate_traces, kmeans_baseline

# %%
# Central clustering: plain Lloyd against DP Lloyd at two budgets.
ds = generate_traces(TraceConfig(n_walks=10_000, seed=0))
print(f"{len(ds)} traces, {ds.routine_count} of them routines")
for name, model in [
    ("non-private", kmeans_baseline(ds.points, 5, seed=0)),
    ("eps=1", dp_kmeans_central(ds.points, 5, 1.0, seed=0)),
    ("eps=0.1", dp_kmeans_central(ds.points, 5, 0.1, seed=0)),
]:
    print(f"{name:>12}: accuracy {clustering_accuracy(model, ds):.3f}")

# %%
# Distributed clustering needs only two secure sums: a histogram of
# nearest reference points and the per-bucket coordinate sums.
for eps in (math.inf, 1.0):
    res = run_distributed_clustering(TraceConfig(n_walks=10_000, seed=0), ClusteringParams(epsilon=eps))
    print(f"eps={eps}: accuracy {res.accuracy:.3f} after {res.rounds} secure sums")

fig, ax = plt.subplots(figsize=(7, 3))
for b in ds.bases:
    ax.plot(b, color="0.7")
for c in res.model.centers:
    ax.plot(c)
ax.set_xlabel("step")
ax.set_ylabel("label / (|labels| - 1)")
fig.tight_layout()
plt.show()
