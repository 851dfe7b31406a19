"""
Publishing a result
===================

The aggregate goes out as a versioned JSON document, a per-client report
CSV and an SVG. A small read-only endpoint serves the JSON.
"""

import json
import tempfile
import urllib.request

from edgeagg.harness import PublishedResult, SimConfig, publish, run_simulation

# %%
result, report = run_simulation(SimConfig(n=30, seed=4))
out = tempfile.mkdtemp()
paths, server = publish(result, report, out, serve=True, port=0)
print({k: str(v) for k, v in paths.items()})

# %%
with urllib.request.urlopen(f"{server.url}/result.json") as resp:
    served = resp.read()
server.stop()
doc = json.loads(served)
print({k: doc[k] for k in ('schema', 'n_included', 'epsilon', 'aggregate_counts')})
print("round-trips:", PublishedResult.from_json(served.decode()) == result)
