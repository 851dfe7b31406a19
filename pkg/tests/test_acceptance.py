"""Exit criteria. Each test prints exactly one verdict line; run with ``pytest tests/test_acceptance.py -s``."""

import itertools
import math
import statistics
import time
import urllib.request
from fractions import Fraction

import numpy as np
import pytest

from edgeagg import shamir
from edgeagg.dpcore import PrivacyParams, discrete_laplace_variance, noise_scales, sample_discrete_laplace
from edgeagg.fieldvec import MaskVector
from edgeagg.harness import ClusteringParams, PublishedResult, SimConfig, central_pooled_pipeline, publish
from edgeagg.harness import run_distributed_clustering, run_simulation
from edgeagg.harness.bench import measure_client
from edgeagg.secsum import RoundConfig, RoundFailure, build_neighbor_graph, random_dropout_schedule, server_run_round
from edgeagg.traces import TraceConfig, clustering_accuracy, dp_kmeans_central, generate_traces, kmeans_baseline
from edgeagg.traces import make_public_structures

pytestmark = pytest.mark.acceptance

VALUE_BOUND = 1 << 40


def random_inputs(rng, n, ell):
    return [
        MaskVector(rng.integers(-VALUE_BOUND, VALUE_BOUND, ell).astype(np.int64).view(np.uint64)) for _ in range(n)
    ]


def plain_sum(inputs, members):
    acc = np.zeros(len(inputs[0]), dtype=np.uint64)
    for i in members:
        acc += inputs[i].elems
    return acc


@pytest.mark.criterion(1)
def test_oracle_sum_exactness(verdict):
    start = time.perf_counter()
    exact = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        inputs = random_inputs(rng, 100, 64)
        cfg = RoundConfig.preset(100, 64)
        total, report = server_run_round(cfg, inputs, graph_seed=seed, seed=seed)
        exact += np.array_equal(total.elems, plain_sum(inputs, range(100))) and len(report.included_clients) == 100
    elapsed = time.perf_counter() - start
    ok = exact == 50
    assert verdict(1, ok, f"{exact}/50 rounds bit-exact at n=100, l=64; {elapsed:.1f}s total (expected < 30s)")


@pytest.mark.criterion(2)
def test_dropout_tolerance(verdict):
    completed = exact = 0
    failures = []
    for seed in range(100):
        rng = np.random.default_rng(10_000 + seed)
        inputs = random_inputs(rng, 100, 64)
        schedule = random_dropout_schedule(100, 1 / 3, rng)
        cfg = RoundConfig.preset(100, 64)
        try:
            total, report = server_run_round(cfg, inputs, schedule, graph_seed=seed, seed=seed)
        except RoundFailure as exc:
            failures.append(seed)
            continue
        completed += 1
        exact += np.array_equal(total.elems, plain_sum(inputs, report.included_clients))
    ok = completed >= 99 and exact == completed
    detail = f"{completed}/100 rounds completed at theta_sim=1/3, {exact} exact over survivors"
    if failures:
        detail += f"; failed seeds {failures}"
    assert verdict(2, ok, detail)


@pytest.mark.criterion(3)
def test_shamir_suite(verdict, gf_table):
    rng = np.random.default_rng(3)
    trips = 0
    for _ in range(500):
        m = int(rng.integers(1, 11))
        t = int(rng.integers(1, m + 1))
        secret = rng.bytes(int(rng.integers(1, 49)))
        shares = shamir.split(secret, t, m, rng)
        pick = rng.choice(m, size=t, replace=False)
        trips += shamir.reconstruct([shares[i] for i in pick], t) == secret

    subsets_ok = True
    for _ in range(5):
        secret = rng.bytes(32)
        shares = shamir.split(secret, 3, 7, rng)
        subsets_ok &= all(shamir.reconstruct(list(c), 3) == secret for c in itertools.combinations(shares, 3))

    # perfect hiding: fix the t-1 observed share values; every secret must fit exactly one polynomial
    hiding_ok = True
    for t in (1, 2, 3):
        for xs in [tuple(range(1, t)), (7, 200)[: t - 1], (255, 1)[: t - 1]]:
            shares = shamir.split(bytes([int(rng.integers(256))]), t, 255, rng)
            ys = [shares[x - 1].payload[0] for x in xs]
            hiding_ok &= _polynomials_per_secret(gf_table, xs, ys, t) == [1] * 256

    ok = trips == 500 and subsets_ok and hiding_ok
    detail = f"round-trips {trips}/500; all 35 subsets at (3,7): {subsets_ok}; hiding for t<=3: {hiding_ok}"
    assert verdict(3, ok, detail)


def _polynomials_per_secret(gf_table, xs, ys, t):
    """Count, per secret, the degree-(t-1) polynomials over GF(256) through the points (x, y)."""
    if t == 1:
        return [1] * 256
    coeffs = np.array(list(itertools.product(range(256), repeat=t - 1)), dtype=np.int64)
    # value of the non-constant part at each x; adding the secret is XOR in GF(2^8)
    parts = []
    for x in xs:
        val = np.zeros(len(coeffs), dtype=np.int64)
        xp = 1
        for c in range(t - 1):
            xp = gf_table[xp, x]
            val ^= gf_table[coeffs[:, c], xp]
        parts.append(val)
    key = np.zeros(len(coeffs), dtype=np.int64)
    for val in parts:
        key = key * 256 + val
    table = np.bincount(key, minlength=256 ** len(xs))
    out = []
    for s in range(256):
        want = 0
        for y in ys:
            want = want * 256 + (y ^ s)
        out.append(int(table[want]))
    return out


@pytest.mark.criterion(4)
def test_dp_log_ratio(verdict):
    c, eps, n = 3, 1.0, 100_000
    start = time.perf_counter()

    def max_log_ratio(rng):
        a = sample_discrete_laplace(c / eps, rng, size=n)
        b = sample_discrete_laplace(c / eps, rng, size=n) + c
        lo = min(a.min(), b.min())
        ca = np.bincount(a - lo)
        cb = np.bincount(b - lo, minlength=len(ca))
        ca = np.pad(ca, (0, len(cb) - len(ca)))
        both = (ca >= 100) & (cb >= 100)
        return float(np.max(np.abs(np.log(ca[both] / cb[both]))))

    worst = max_log_ratio(np.random.default_rng(0))
    # context only: how often an exact mechanism clears the bar at this sample size
    others = [max_log_ratio(np.random.default_rng(s)) for s in range(1, 21)]
    elapsed = time.perf_counter() - start
    ok = worst <= eps + 0.1 and elapsed < 10
    detail = (
        f"max |log ratio| {worst:.3f} (bound 1.1) at seed 0; {elapsed:.1f}s; "
        f"seeds 1-20 within bound: {sum(w <= 1.1 for w in others)}/20"
    )
    assert verdict(4, ok, detail)


@pytest.mark.criterion(5)
def test_dropout_noise_scaling(verdict):
    base = PrivacyParams(1.0, 0, cap_c=3, cap_b=20)
    scaled = PrivacyParams(1.0, Fraction(1, 3), cap_c=3, cap_b=20)
    ratios = [b / a for a, b in zip(noise_scales(4, base), noise_scales(4, scaled))]
    exact = all(b == 1.5 * a for a, b in zip(noise_scales(4, base), noise_scales(4, scaled)))
    rng = np.random.default_rng(5)
    errs = []
    for scale in (base.label_scale(), scaled.label_scale(), scaled.bt_scale()):
        x = sample_discrete_laplace(scale, rng, size=100_000)
        errs.append(abs(np.var(x) / discrete_laplace_variance(scale) - 1))
    ok = exact and max(errs) <= 0.05
    assert verdict(5, ok, f"scale ratios {sorted(set(ratios))}; worst variance error {max(errs):.2%} (bound 5%)")


@pytest.mark.criterion(6)
@pytest.mark.slow
def test_sublinear_per_client_cost(verdict):
    ell = 1 << 18
    rows = []
    for n, k in ((100, 20), (1000, 83), (10_000, 103)):
        cfg = RoundConfig(n=n, k=k, vec_len=ell)
        costs = []
        for rep in range(3):
            graph = build_neighbor_graph(n, k, rep)
            picks = np.random.default_rng([n, rep]).choice(n, size=3, replace=False)
            costs += [measure_client(cfg, graph, int(c), seed=rep) for c in picks]
        rows.append(
            (
                n,
                statistics.median(c.bytes_total for c in costs),
                statistics.median(c.sharing_time + c.prg_time for c in costs),
                statistics.median(c.degree for c in costs),
            )
        )
    growth = []
    for (n0, b0, t0, _), (n1, b1, t1, _) in zip(rows, rows[1:]):
        growth.append((f"{n0}->{n1}", b1 / b0, t1 / t0))
    ok = all(gb < 2 and gt < 2 for _, gb, gt in growth)
    detail = "; ".join(f"{step}: bytes x{gb:.2f}, sharing+prg x{gt:.2f}" for step, gb, gt in growth)
    detail += " | degrees " + ", ".join(f"{n}:{d:.0f}" for n, _, _, d in rows)
    assert verdict(6, ok, detail)


@pytest.mark.criterion(7)
@pytest.mark.slow
def test_clustering_trends(verdict):
    start = time.perf_counter()
    acc = {key: [] for key in ("np-1e4", "e1-1e4", "e01-1e4", "e1-1e3")}
    for seed in range(10):
        for walks in (10_000, 1_000):
            ds = generate_traces(TraceConfig(n_walks=walks, seed=seed))
            tag = "1e4" if walks == 10_000 else "1e3"
            if walks == 10_000:
                acc["np-1e4"].append(clustering_accuracy(kmeans_baseline(ds.points, 5, iters=50, seed=seed), ds))
                model = dp_kmeans_central(ds.points, 5, 0.1, iters=5, seed=seed)
                acc["e01-1e4"].append(clustering_accuracy(model, ds))
            model = dp_kmeans_central(ds.points, 5, 1.0, iters=5, seed=seed)
            acc[f"e1-{tag}"].append(clustering_accuracy(model, ds))
    m = {key: float(np.mean(v)) for key, v in acc.items()}
    elapsed = time.perf_counter() - start
    ok = (
        m["np-1e4"] > m["e1-1e4"] > m["e01-1e4"]
        and m["e1-1e4"] >= m["e1-1e3"]
        and m["e1-1e4"] >= 0.15
        and elapsed < 300
    )
    detail = (
        f"10^4 walks: non-private {m['np-1e4']:.3f}, eps=1 {m['e1-1e4']:.3f}, eps=0.1 {m['e01-1e4']:.3f}; "
        f"eps=1 at 10^3 {m['e1-1e3']:.3f}; {elapsed:.0f}s"
    )
    assert verdict(7, ok, detail)


@pytest.mark.criterion(8)
def test_two_invocation_clustering(verdict):
    tc = TraceConfig(n_walks=10_000, seed=0)
    params = ClusteringParams(epsilon=math.inf)
    res = run_distributed_clustering(tc, params)
    public = make_public_structures(params.public_seed, tc.trace_len, params.d_proj, params.n_refs)
    central = central_pooled_pipeline(res.dataset, public, params)
    same = np.array_equal(res.model.centers, central.centers) and np.array_equal(res.model.weights, central.weights)
    ok = res.rounds == 2 and same
    assert verdict(8, ok, f"secure-summation rounds {res.rounds}; noiseless centers bit-identical to pooled: {same}")


@pytest.mark.criterion(9)
def test_publishing_round_trip(verdict, tmp_path):
    result, report = run_simulation(SimConfig(n=20, k=5, seed=9))
    paths, server = publish(result, report, tmp_path, serve=True, port=0)
    try:
        parsed = PublishedResult.from_json(paths["result"].read_text())
        with urllib.request.urlopen(f"{server.url}/result.json", timeout=5) as resp:
            served = resp.read()
    finally:
        server.stop()
    same_bytes = served == paths["result"].read_bytes()
    ok = parsed == result and same_bytes
    assert verdict(9, ok, f"re-parsed equal: {parsed == result}; served bytes identical: {same_bytes}")
