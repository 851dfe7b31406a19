"""Command-line entry point: ``edgeagg simulate|bench|cluster|publish|serve``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from edgeagg.harness.config import DropoutConfig, SimConfig, load_sim_config, preset_n
from edgeagg.secsum.config import PRESET_DEGREES, PRESET_NAMES, RoundConfig

log = logging.getLogger("edgeagg")


def _sim_config(args) -> SimConfig:
    cfg = load_sim_config(args.config) if args.config else SimConfig()
    if args.preset:
        cfg = replace(cfg, n=preset_n(args.preset), k=None)
    overrides = {
        k: v
        for k, v in {
            "n": args.n,
            "k": args.k,
            "num_labels": args.labels,
            "transport": args.transport,
            "seed": args.seed,
            "output_dir": args.output_dir,
            "t": args.t,
        }.items()
        if v is not None
    }
    cfg = replace(cfg, **overrides)
    privacy = {
        k: v
        for k, v in {"epsilon": args.epsilon, "theta": args.theta, "cap_c": args.cap_c, "cap_b": args.cap_b}.items()
        if v is not None
    }
    if args.noiseless:
        privacy["epsilon"] = math.inf
    if privacy:
        cfg = replace(cfg, privacy=replace(cfg.privacy, **privacy))
    if args.theta_sim is not None:
        cfg = replace(cfg, dropout=DropoutConfig(args.theta_sim))
    return cfg


def cmd_simulate(args) -> int:
    from edgeagg.harness.publish import publish
    from edgeagg.harness.simulate import run_simulation

    cfg = _sim_config(args)
    out = cfg.output_dir or "out"
    cfg = replace(cfg, output_dir=None)
    result, report = run_simulation(cfg)
    written = publish(result, report, out, plot=not args.no_plot)
    print(result.to_json(), end="")
    print(
        f"# included {result.n_included}/{cfg.n} clients, "
        f"median traffic {sorted(report.client_bytes(i) for i in range(cfg.n))[cfg.n // 2]} bytes/client, "
        f"round {report.total_time:.2f}s",
        file=sys.stderr,
    )
    for path in written.values():
        print(f"# wrote {path}", file=sys.stderr)
    if args.serve:
        return _serve(out, args.port, args.host)
    return 0


def cmd_bench(args) -> int:
    from edgeagg.harness.bench import bench_primitives, format_table

    sizes = [preset_n(p) for p in args.preset] if args.preset else args.n or [1_000, 10_000, 100_000]
    rows = []
    for n in sizes:
        k = args.k if args.k is not None else PRESET_DEGREES.get(n, min(n - 1, 20))
        rc = RoundConfig(n=n, k=k, vec_len=args.vec_len)
        full = None if args.full_round is None else args.full_round == "yes"
        rows.append(bench_primitives(rc, args.repetitions, args.samples, full_round=full, seed=args.seed))
        log.info("done n=%d", n)
    print(format_table(rows))
    if args.json:
        Path(args.json).write_text(json.dumps([r.as_dict() for r in rows], indent=2) + "\n")
    return 0


def cmd_cluster(args) -> int:
    from edgeagg.harness.cluster import ClusteringParams, run_distributed_clustering
    from edgeagg.traces.generate import TraceConfig
    from edgeagg.traces.io import save_dataset

    tc = TraceConfig(n_walks=args.walks, seed=args.seed, num_routines=args.routines)
    params = ClusteringParams(
        n_clients=args.clients,
        k=args.k or args.routines,
        epsilon=math.inf if args.noiseless else args.epsilon,
        seed=args.seed,
        min_count=args.min_count,
        n_refs=args.refs,
        d_proj=args.d_proj,
    )
    res = run_distributed_clustering(tc, params)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = {
        "accuracy": res.accuracy,
        "rounds": res.rounds,
        "epsilon": None if math.isinf(params.epsilon) else params.epsilon,
        "n_clients": params.n_clients,
        "n_walks": args.walks,
        "centers": res.model.centers.tolist(),
        "weights": res.model.weights.tolist(),
    }
    (out / "clusters.json").write_text(json.dumps(summary, indent=2) + "\n")
    if args.export_traces:
        save_dataset(res.dataset, out / "traces.csv", out / "truth.csv", out / "bases.csv")
    print(f"accuracy {res.accuracy:.3f} after {res.rounds} secure-summation rounds; wrote {out / 'clusters.json'}")
    return 0


def cmd_publish(args) -> int:
    from edgeagg.harness.publish import PublishedResult, publish

    result = PublishedResult.from_json(Path(args.result).read_text())
    written = publish(result, None, args.output_dir)
    print(f"published {written['result']}")
    if args.serve:
        return _serve(args.output_dir, args.port, args.host)
    return 0


def cmd_serve(args) -> int:
    return _serve(args.dir, args.port, args.host)


def _serve(directory, port: int, host: str) -> int:
    from edgeagg.harness.publish import ResultServer

    try:
        server = ResultServer(directory, port=port, host=host)
    except OSError as exc:
        print(f"cannot bind {host}:{port}: {exc}", file=sys.stderr)
        return 2
    print(f"serving {directory} at {server.url}/result.json", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.httpd.server_close()
    return 0


def _add_serve_flags(p) -> None:
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgeagg", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="aggregate synthetic client histograms")
    p.add_argument("--config", help="JSON file with SimConfig fields")
    p.add_argument("--preset", choices=sorted(PRESET_NAMES))
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, help="graph degree target")
    p.add_argument("--t", type=int, help="fixed reconstruction threshold")
    p.add_argument("--labels", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("--theta", type=float, help="expected dropout fraction used for noise scaling")
    p.add_argument("--theta-sim", type=float, help="simulated dropout probability")
    p.add_argument("--cap-c", type=int)
    p.add_argument("--cap-b", type=int)
    p.add_argument("--transport", choices=["in_process", "loopback_tcp"])
    p.add_argument("--seed", type=int)
    p.add_argument("--output-dir")
    p.add_argument("--no-plot", action="store_true")
    p.add_argument("--serve", action="store_true")
    _add_serve_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="per-client sharing/PRG cost and round time")
    p.add_argument("--preset", action="append", choices=sorted(PRESET_NAMES))
    p.add_argument("--n", type=int, action="append")
    p.add_argument("--k", type=int)
    p.add_argument("--vec-len", type=int, default=64)
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--samples", type=int, default=3, help="clients measured per repetition")
    p.add_argument("--full-round", choices=["yes", "no"], help="default: only up to 1000 clients")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("cluster", help="one-round distributed clustering of synthetic traces")
    p.add_argument("--walks", type=int, default=10_000)
    p.add_argument("--clients", type=int, default=100)
    p.add_argument("--routines", type=int, default=5)
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("--min-count", type=float, default=200.0)
    p.add_argument("--refs", type=int, default=64)
    p.add_argument("--d-proj", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-dir", default="out")
    p.add_argument("--export-traces", action="store_true")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("publish", help="validate a result.json and publish it")
    p.add_argument("result")
    p.add_argument("--output-dir", default="out")
    p.add_argument("--serve", action="store_true")
    _add_serve_flags(p)
    p.set_defaults(func=cmd_publish)

    p = sub.add_parser("serve", help="serve GET /result.json and /healthz")
    p.add_argument("--dir", default="out")
    _add_serve_flags(p)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
