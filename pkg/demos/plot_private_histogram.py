"""
Private histograms, end to end
==============================

Each client clips its label counts, adds discrete Laplace noise and runs
the secure sum. The published histogram carries the privacy parameters
needed to read it.
"""

from fractions import Fraction

import numpy as np
import matplotlib.pyplot as plt

from edgeagg.dpcore import PrivacyParams, clip_histogram, discrete_laplace_variance, sample_discrete_laplace
from edgeagg.harness import DropoutConfig, SimConfig, client_histograms, run_simulation

# %%
# The noise is the difference of two geometric draws. Its variance has a
# closed form, which the sampler should hit.
rng = np.random.default_rng(0)
for scale in (1.0, 3.0, 4.5):
    x = sample_discrete_laplace(scale, rng, size=100_000)
    print(f"scale {scale}: sample var {x.var():8.3f}   closed form {discrete_laplace_variance(scale):8.3f}")

# %%
# Clients expecting a fraction theta of their peers to drop out inflate
# their noise by 1 / (1 - theta), so the survivors' sum still carries
# enough noise.
p0 = PrivacyParams(1.0, cap_c=3, cap_b=20)
p1 = PrivacyParams(1.0, Fraction(1, 3), cap_c=3, cap_b=20)
print("label scale", p0.label_scale(), "->", p1.label_scale())

# %%
# The full pipeline on 100 clients, with a tenth of them dropping.
cfg = SimConfig(n=100, privacy=PrivacyParams(1.0, Fraction(1, 10), cap_c=5, cap_b=20), dropout=DropoutConfig(0.1))
result, report = run_simulation(cfg)
truth = [clip_histogram(h, cfg.privacy) for h in client_histograms(cfg)]
clipped = np.sum([truth[i].label_counts for i in report.included_clients], axis=0)
print(f"{result.n_included} of {cfg.n} clients included")

fig, ax = plt.subplots(figsize=(7, 3))
pos = np.arange(len(result.label_names))
ax.bar(pos - 0.2, clipped, width=0.4, label="clipped sum")
ax.bar(pos + 0.2, result.aggregate_counts, width=0.4, label="published")
ax.set_xticks(pos, result.label_names, rotation=45, ha="right")
ax.legend()
fig.tight_layout()
plt.show()
