import json
import math
import socket
import urllib.error
import urllib.request
from dataclasses import replace

import numpy as np
import pytest

from edgeagg.dpcore import PrivacyParams, clip_histogram
from edgeagg.harness import (
    ClusteringParams,
    DropoutConfig,
    PublishedResult,
    ResultServer,
    SimConfig,
    SummationService,
    bench_primitives,
    central_pooled_pipeline,
    client_histograms,
    load_sim_config,
    measure_client,
    publish,
    run_distributed_clustering,
    run_simulation,
)
from edgeagg.harness.bench import format_table
from edgeagg.harness.cli import main
from edgeagg.harness.config import sim_config_to_dict
from edgeagg.secsum import RoundConfig, build_neighbor_graph, server_run_round
from edgeagg.fieldvec import MaskVector
from edgeagg.secsum.messages import encode_message
from edgeagg.traces import TraceConfig, make_public_structures


def clipped_sums(cfg):
    hs = [clip_histogram(h, cfg.privacy) for h in client_histograms(cfg)]
    labels = np.sum([h.label_counts for h in hs], axis=0).tolist()
    return labels, sum(h.bt_device_count for h in hs)


def small_result(**kw):
    base = dict(
        round_id="00" * 16,
        label_names=("home", "street"),
        aggregate_counts=(5, -1),
        bt_aggregate=12,
        n_included=3,
        epsilon=1.0,
        theta=0.25,
        cap_c=5,
        cap_b=20,
        timestamp="2026-01-01T00:00:00+00:00",
    )
    base.update(kw)
    return PublishedResult(**base)


def get(url):
    try:
        with urllib.request.urlopen(url, timeout=5) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as err:
        return err.code, err.read()


# -- simulation ------------------------------------------------------------------


def test_zero_clients_rejected():
    with pytest.raises(ValueError):
        SimConfig(n=0)
    assert main(["simulate", "--n", "0"]) == 2


def test_near_noiseless_matches_clipped_sums():
    exact = 0
    runs = 20
    for seed in range(runs):
        cfg = SimConfig(n=100, privacy=PrivacyParams(1e6, cap_c=5, cap_b=20), seed=seed)
        result, report = run_simulation(cfg)
        labels, bt = clipped_sums(cfg)
        exact += list(result.aggregate_counts) == labels and result.bt_aggregate == bt
        assert result.n_included == 100
    assert exact / runs >= 0.99


def test_noiseless_sum_with_dropouts_matches_survivors():
    cfg = SimConfig(n=40, k=12, privacy=PrivacyParams.noiseless(cap_c=5, cap_b=20), dropout=DropoutConfig(0.2), seed=3)
    result, report = run_simulation(cfg)
    hs = [clip_histogram(h, cfg.privacy) for h in client_histograms(cfg)]
    inc = report.included_clients
    assert len(inc) < 40
    assert list(result.aggregate_counts) == np.sum([hs[i].label_counts for i in inc], axis=0).tolist()
    assert result.bt_aggregate == sum(hs[i].bt_device_count for i in inc)
    assert result.epsilon == math.inf


def test_report_bytes_match_message_log():
    service = SummationService(keep_log=True)
    cfg = SimConfig(n=20, k=5, dropout=DropoutConfig(0.2), seed=1)
    _, report = run_simulation(cfg, service=service)
    log = service.accountants[-1].log
    sent, recv = {}, {}
    for direction, client, msg in log:
        tally = sent if direction == "up" else recv
        tally[client] = tally.get(client, 0) + len(encode_message(msg))
    for i in range(cfg.n):
        assert report.bytes_sent[i] == sent.get(i, 0)
        assert report.bytes_received[i] == recv.get(i, 0)


def test_simulation_deterministic_apart_from_times():
    cfg = SimConfig(n=15, k=4, dropout=DropoutConfig(0.2), seed=7)
    r1, a = run_simulation(cfg)
    r2, b = run_simulation(cfg)
    assert a.timing_free() == b.timing_free()
    assert r1.aggregate_counts == r2.aggregate_counts
    assert replace(r1, timestamp="") == replace(r2, timestamp="")


def test_dropout_above_tolerance_warns():
    cfg = SimConfig(n=10, k=3, dropout=DropoutConfig(0.5))
    with pytest.warns(UserWarning):
        cfg.round_config()


def test_simulation_writes_outputs(tmp_path):
    cfg = SimConfig(n=8, k=3, seed=2, output_dir=str(tmp_path))
    result, _ = run_simulation(cfg)
    assert PublishedResult.from_json((tmp_path / "result.json").read_text()) == result
    rows = (tmp_path / "report.csv").read_text().splitlines()
    assert len(rows) == 1 + cfg.n
    assert (tmp_path / "report.svg").read_text().lstrip().startswith("<?xml")


def test_tcp_transport_in_simulation():
    cfg = SimConfig(n=10, k=3, seed=4)
    r_a, a = run_simulation(cfg)
    r_b, b = run_simulation(replace(cfg, transport="loopback_tcp"))
    assert r_a.aggregate_counts == r_b.aggregate_counts
    assert a.bytes_sent == b.bytes_sent


def test_config_file_round_trip(tmp_path):
    cfg = SimConfig(n=12, k=4, privacy=PrivacyParams(math.inf, theta=0.1, cap_c=3, cap_b=9), seed=5)
    path = tmp_path / "sim.json"
    path.write_text(json.dumps(sim_config_to_dict(cfg)))
    assert load_sim_config(path) == cfg
    path.write_text(json.dumps({"preset": "table1-1e3", "seed": 1}))
    loaded = load_sim_config(path)
    assert loaded.n == 1000 and loaded.degree == 83
    path.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ValueError):
        load_sim_config(path)


# -- benchmarks -----------------------------------------------------------------


def test_ego_measurement_matches_full_round_bytes():
    rc = RoundConfig(n=30, k=6, vec_len=16)
    graph = build_neighbor_graph(30, 6, 0)
    zeros = [MaskVector.zeros(16)] * 30
    _, report = server_run_round(rc, zeros, graph=graph, seed=0)
    for c in (0, 11, 29):
        cost = measure_client(rc, graph, c)
        assert cost.bytes_sent == report.bytes_sent[c]
        assert cost.bytes_received == report.bytes_received[c]


def test_bench_preset_row_and_low_confidence():
    rc = RoundConfig.preset(1000, 16)
    assert rc.k == 83
    row = bench_primitives(rc, repetitions=1, sample_clients=2, full_round=False)
    assert row.users == 1000 and row.neighbours == 83
    assert row.low_confidence and row.total is None
    assert 83 <= row.mean_degree <= 166
    assert "low confidence" in format_table([row])
    with pytest.raises(ValueError):
        bench_primitives(rc, repetitions=0)


def test_bench_small_full_round():
    row = bench_primitives(RoundConfig(n=20, k=4, vec_len=8), repetitions=2, sample_clients=2)
    assert row.total is not None and row.total > 0
    assert not row.low_confidence
    assert set(row.as_dict()) >= {"users", "neighbours", "sharing", "prg", "total"}


# -- distributed clustering ---------------------------------------------------------


def test_distributed_clustering_two_rounds_matches_central():
    tc = TraceConfig(n_walks=2000, seed=3)
    params = ClusteringParams(n_clients=20, epsilon=math.inf, min_count=20)
    service = SummationService()
    res = run_distributed_clustering(tc, params, service)
    assert res.rounds == 2 and service.rounds == 2
    public = make_public_structures(params.public_seed, tc.trace_len, params.d_proj, params.n_refs)
    central = central_pooled_pipeline(res.dataset, public, params)
    assert np.array_equal(res.model.centers, central.centers)
    assert np.array_equal(res.model.weights, central.weights)


@pytest.mark.slow
def test_distributed_clustering_budget_trend():
    # averaged over seeds because the per-client noise makes single runs erratic
    tc = TraceConfig(n_walks=10_000)
    acc = {}
    for eps in (1.0, 0.1):
        acc[eps] = np.mean(
            [
                run_distributed_clustering(replace(tc, seed=s), ClusteringParams(epsilon=eps, seed=s)).accuracy
                for s in range(10)
            ]
        )
    assert acc[1.0] > acc[0.1]


# -- publishing -------------------------------------------------------------------------


def test_result_json_round_trip():
    for r in (small_result(), small_result(epsilon=math.inf)):
        assert PublishedResult.from_json(r.to_json()) == r
    doc = json.loads(small_result().to_json())
    assert doc["schema"] == 1 and doc["epsilon"] == 1.0 and doc["cap_c"] == 5


def test_result_validation():
    doc = json.loads(small_result().to_json())
    for key in ("schema", "aggregate_counts", "epsilon"):
        broken = dict(doc)
        del broken[key]
        with pytest.raises(ValueError):
            PublishedResult.from_json(json.dumps(broken))
    with pytest.raises(ValueError):
        PublishedResult.from_json(json.dumps({**doc, "schema": 2}))
    with pytest.raises(ValueError):
        PublishedResult.from_json(json.dumps({**doc, "aggregate_counts": [1]}))


def test_serve_endpoints(tmp_path):
    result = small_result()
    paths, server = publish(result, None, tmp_path, serve=True, port=0)
    try:
        status, body = get(f"{server.url}/result.json")
        assert status == 200 and body == paths["result"].read_bytes()
        assert PublishedResult.from_json(body.decode()) == result
        assert get(f"{server.url}/healthz") == (200, b"ok\n")
        assert get(f"{server.url}/nope")[0] == 404
        req = urllib.request.Request(f"{server.url}/result.json", data=b"x", method="POST")
        with pytest.raises(urllib.error.HTTPError) as info:
            urllib.request.urlopen(req, timeout=5)
        assert info.value.code == 405
    finally:
        server.stop()


def test_port_in_use(tmp_path):
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        s.listen()
        port = s.getsockname()[1]
        with pytest.raises(OSError):
            ResultServer(tmp_path, port=port)
        assert main(["serve", "--dir", str(tmp_path), "--port", str(port)]) == 2


def test_unwritable_output_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        publish(small_result(), None, blocker / "sub")


# -- CLI ----------------------------------------------------------------------------------


def test_cli_simulate(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["simulate", "--n", "12", "--k", "4", "--noiseless", "--seed", "1", "--output-dir", str(out), "--no-plot"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_included"] == 12 and doc["epsilon"] is None
    assert (out / "result.json").exists() and not (out / "report.svg").exists()


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 9, "k": 3, "privacy": {"epsilon": 2.0}}))
    assert main(["simulate", "--config", str(cfg), "--output-dir", str(tmp_path / "o"), "--no-plot"]) == 0
    assert json.loads(capsys.readouterr().out)["epsilon"] == 2.0


def test_cli_bench(tmp_path, capsys):
    js = tmp_path / "b.json"
    assert main(["bench", "--n", "30", "--k", "5", "--vec-len", "8", "--repetitions", "1", "--json", str(js)]) == 0
    assert "Users" in capsys.readouterr().out
    assert json.loads(js.read_text())[0]["users"] == 30


def test_cli_cluster(tmp_path, capsys):
    out = tmp_path / "c"
    args = ["cluster", "--walks", "1000", "--clients", "10", "--noiseless", "--min-count", "10", "--output-dir", str(out), "--export-traces"]
    assert main(args) == 0
    summary = json.loads((out / "clusters.json").read_text())
    assert summary["rounds"] == 2
    assert (out / "traces.csv").exists() and (out / "truth.csv").exists()


def test_cli_publish(tmp_path):
    src = tmp_path / "in.json"
    src.write_text(small_result().to_json())
    assert main(["publish", str(src), "--output-dir", str(tmp_path / "pub")]) == 0
    assert (tmp_path / "pub" / "result.json").read_text() == src.read_text()
    src.write_text("{}")
    assert main(["publish", str(src), "--output-dir", str(tmp_path / "pub")]) == 2
