"""
Per-client cost as the population grows
=======================================

Each client only talks to its graph neighbours, so its traffic barely
depends on the number of clients. Compute grows with the neighbour count.
"""

from edgeagg.harness.bench import bench_primitives, format_table
from edgeagg.secsum import RoundConfig

# %%
# Full rounds are run only at the small size; the larger sizes measure a
# few sampled clients against stand-in neighbours, which reproduces their
# messages byte for byte.
rows = []
for n in (100, 1000, 10_000):
    rows.append(bench_primitives(RoundConfig.preset(n, 4096), repetitions=2, sample_clients=2, full_round=n <= 100))
print(format_table(rows))

# %%
for r in rows:
    print(f"n={r.users:>6}: mean degree {r.mean_degree:6.1f}, {r.bytes_per_client / 1024:7.1f} KiB per client")
