"""Published results: the JSON document third parties read, plus report files and a tiny read-only web endpoint."""

from __future__ import annotations

import csv
import json
import math
import threading
from dataclasses import asdict, dataclass
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from edgeagg.secsum.server import RoundReport

SCHEMA_VERSION = 1
RESULT_FILE = "result.json"
REPORT_FILE = "report.csv"
PLOT_FILE = "report.svg"

_REQUIRED = {
    "schema": int,
    "round_id": str,
    "label_names": list,
    "aggregate_counts": list,
    "bt_aggregate": int,
    "n_included": int,
    "theta": (int, float),
    "cap_c": int,
    "cap_b": int,
    "timestamp": str,
}


@dataclass(frozen=True)
class PublishedResult:
    round_id: str
    label_names: tuple[str, ...]
    aggregate_counts: tuple[int, ...]
    bt_aggregate: int
    n_included: int
    epsilon: float
    theta: float
    cap_c: int
    cap_b: int
    timestamp: str
    schema: int = SCHEMA_VERSION

    def to_json(self) -> str:
        d = asdict(self)
        d["label_names"] = list(self.label_names)
        d["aggregate_counts"] = list(self.aggregate_counts)
        # infinite budget (noise disabled) is published as null
        d["epsilon"] = None if math.isinf(self.epsilon) else self.epsilon
        return json.dumps(d, indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> PublishedResult:
        d = json.loads(text)
        validate_result(d)
        return cls(
            round_id=d["round_id"],
            label_names=tuple(d["label_names"]),
            aggregate_counts=tuple(int(c) for c in d["aggregate_counts"]),
            bt_aggregate=int(d["bt_aggregate"]),
            n_included=int(d["n_included"]),
            epsilon=math.inf if d["epsilon"] is None else float(d["epsilon"]),
            theta=float(d["theta"]),
            cap_c=int(d["cap_c"]),
            cap_b=int(d["cap_b"]),
            timestamp=d["timestamp"],
            schema=int(d["schema"]),
        )


def validate_result(d: dict) -> None:
    for key, typ in _REQUIRED.items():
        if key not in d:
            raise ValueError(f"result.json is missing {key!r}")
        if not isinstance(d[key], typ) or isinstance(d[key], bool):
            raise ValueError(f"result.json field {key!r} has the wrong type")
    if "epsilon" not in d or not (d["epsilon"] is None or isinstance(d["epsilon"], (int, float))):
        raise ValueError("result.json field 'epsilon' must be a number or null")
    if d["schema"] != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {d['schema']}")
    if len(d["label_names"]) != len(d["aggregate_counts"]):
        raise ValueError("label_names and aggregate_counts differ in length")


def write_report_csv(report: RoundReport, path: Path) -> None:
    included = set(report.included_clients)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["client", "included", "dropped_at", "bytes_sent", "bytes_received", "sharing_time", "prg_time"])
        for i in range(report.n):
            w.writerow([
                i,
                int(i in included),
                report.dropped.get(i, ""),
                report.bytes_sent.get(i, 0),
                report.bytes_received.get(i, 0),
                f"{report.sharing_time.get(i, 0.0):.6f}",
                f"{report.prg_time.get(i, 0.0):.6f}",
            ])


def write_plot(report: RoundReport, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    totals = [report.client_bytes(i) / 1024 for i in range(report.n)]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.hist(totals, bins=min(30, max(5, report.n // 5)), color="#4c72b0")
    ax.set_xlabel("traffic per client (KiB, sent + received)")
    ax.set_ylabel("clients")
    ax.set_title(f"{len(report.included_clients)}/{report.n} clients included")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def publish(
    result: PublishedResult,
    report: RoundReport | None,
    output_dir: str | Path,
    serve: bool = False,
    port: int = 8000,
    host: str = "127.0.0.1",
    plot: bool = True,
):
    """Write result.json (and report files when a report is given).

    Returns the written paths, plus a running ``ResultServer`` when ``serve`` is set.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"result": out / RESULT_FILE}
    paths["result"].write_text(result.to_json())
    if report is not None:
        paths["report"] = out / REPORT_FILE
        write_report_csv(report, paths["report"])
        if plot:
            paths["plot"] = out / PLOT_FILE
            write_plot(report, paths["plot"])
    if serve:
        server = ResultServer(out, port=port, host=host)
        server.start()
        return paths, server
    return paths


class _Handler(BaseHTTPRequestHandler):
    root: Path

    def do_GET(self):
        if self.path == "/healthz":
            self._send(HTTPStatus.OK, b"ok\n", "text/plain")
        elif self.path == "/" + RESULT_FILE:
            try:
                body = (self.root / RESULT_FILE).read_bytes()
            except FileNotFoundError:
                self._send(HTTPStatus.NOT_FOUND, b"no result published\n", "text/plain")
                return
            self._send(HTTPStatus.OK, body, "application/json")
        else:
            self._send(HTTPStatus.NOT_FOUND, b"not found\n", "text/plain")

    def do_POST(self):
        self._send(HTTPStatus.METHOD_NOT_ALLOWED, b"read-only\n", "text/plain")

    do_PUT = do_DELETE = do_POST

    def _send(self, status, body: bytes, ctype: str):
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, fmt, *args):
        pass


class ResultServer:
    """Serves GET /result.json and GET /healthz from a directory."""

    def __init__(self, root: str | Path, port: int = 8000, host: str = "127.0.0.1"):
        handler = type("Handler", (_Handler,), {"root": Path(root)})
        # raises OSError when the port is taken
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> None:
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()

    def serve_forever(self) -> None:
        self.httpd.serve_forever()

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread is not None:
            self._thread.join()

    def __enter__(self):
        if self._thread is None:
            self.start()
        return self

    def __exit__(self, *exc):
        self.stop()
