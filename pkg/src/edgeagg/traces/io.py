"""CSV export of trace datasets: one trace per row plus a ground-truth sidecar."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from edgeagg.traces.generate import TraceDataset


def save_dataset(ds: TraceDataset, traces_path: str | Path, truth_path: str | Path, bases_path: str | Path | None = None) -> None:
    np.savetxt(traces_path, ds.points, delimiter=",", fmt="%.17g")
    with open(truth_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["type", "routine_id"])
        for routine, rid in zip(ds.is_routine, ds.routine_id):
            w.writerow(["routine" if routine else "noise", int(rid)])
    if bases_path is not None:
        np.savetxt(bases_path, ds.bases, delimiter=",", fmt="%.17g")


def load_dataset(traces_path: str | Path, truth_path: str | Path, bases_path: str | Path) -> TraceDataset:
    points = np.atleast_2d(np.loadtxt(traces_path, delimiter=",", ndmin=2))
    bases = np.atleast_2d(np.loadtxt(bases_path, delimiter=",", ndmin=2))
    kinds, ids = [], []
    with open(truth_path, newline="") as fh:
        for row in csv.DictReader(fh):
            kinds.append(row["type"] == "routine")
            ids.append(int(row["routine_id"]))
    if len(kinds) != len(points):
        raise ValueError("ground truth rows do not match trace rows")
    return TraceDataset(points, np.array(kinds, dtype=bool), np.array(ids, dtype=np.int64), bases)
