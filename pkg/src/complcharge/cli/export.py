"""CSV export of quadruples: one row per cubature node."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..synthesis import MEMBER_NAMES

HEADER = ("x1", "x2", "x3", "w") + MEMBER_NAMES


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export_quadruple(q, cubature, path) -> Path:
    """Write ``x1,x2,x3,w,phi,Phi,psi,Psi`` rows in cubature node order."""
    path = Path(path)
    members = q.as_array()
    if members.shape[1] != cubature.n_nodes:
        raise ValueError(f"quadruple has {members.shape[1]} values, cubature {cubature.n_nodes} nodes")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for a in range(cubature.n_nodes):
            row = list(cubature.nodes[a]) + [cubature.weights[a]] + list(members[:, a])
            writer.writerow([_fmt(x) for x in row])
    return path


def read_quadruple_csv(path):
    """Inverse of :func:`export_quadruple`: ``(nodes, weights, members)``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        rows = np.array([[float(x) for x in row] for row in reader], dtype=np.float64)
    rows = rows.reshape(-1, len(HEADER))
    return rows[:, :3], rows[:, 3], rows[:, 4:].T
