"""
Secure summation with dropouts
==============================

A hundred simulated clients each hold a vector of signed integers. The
server learns only their sum, even when a third of the clients vanish
partway through the round.
"""

import numpy as np

from edgeagg.fieldvec import EncodingParams, decode_sum, encode_counts
from edgeagg.secsum import DropPoint, RoundConfig, RoundFailure, server_run_round

# %%
# Inputs are encoded into the group of integers mod 2^64. Negative values
# wrap around and come back out of ``decode_sum`` unchanged.
rng = np.random.default_rng(0)
n, ell = 100, 8
enc = EncodingParams(vec_len=ell, value_bound=1000)
raw = rng.integers(-1000, 1000, size=(n, ell))
inputs = [encode_counts(row, enc) for row in raw]

cfg = RoundConfig.preset(n, ell)
print(f"{cfg.n} clients, graph degree target {cfg.k}")

total, report = server_run_round(cfg, inputs, seed=1)
print("decoded:  ", decode_sum(total, enc, n))
print("plaintext:", raw.sum(axis=0).tolist())

# %%
# Now a third of the clients drop at random phase boundaries. Those that
# leave before masking are simply absent from the sum; their pairwise masks
# are rebuilt from the key shares their neighbours hold.
drops = rng.choice(n, size=n // 3, replace=False)
schedule = {int(i): DropPoint(int(rng.integers(1, 4))) for i in drops}
total, report = server_run_round(cfg, inputs, schedule, seed=2)
survivors = list(report.included_clients)
print(f"{len(survivors)} clients included")
print("decoded:  ", decode_sum(total, enc, len(survivors)))
print("survivors:", raw[survivors].sum(axis=0).tolist())

# %%
# With a fixed threshold that the surviving neighbourhoods cannot meet,
# the round fails loudly instead of releasing a partially masked vector.
strict = RoundConfig(n=20, k=6, vec_len=ell, t=6)
schedule = {i: DropPoint.AFTER_SHARES for i in range(0, 20, 2)}
try:
    server_run_round(strict, inputs[:20], schedule, seed=3)
except RoundFailure as exc:
    print("round failed:", exc)
    print("clients short of shares (have, need):", dict(list(exc.missing.items())[:4]))
