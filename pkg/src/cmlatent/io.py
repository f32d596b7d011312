"""Reading and writing chain output and data files.

Draws are stored as plain CSV with one kept iteration per row.  Column
headers follow the summaries() naming scheme (beta_1, eta_2, v_3_1,
alpha_xi, ...).  Values are written with %.17g so a written file round
trips bit for bit through float parsing.  A JSON sidecar records the run
configuration and seed so a run can be reproduced exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .data_model import DataModel
from .lcm import ChainOutput


def _columns(chain: ChainOutput) -> tuple[list[str], np.ndarray]:
    headers = []
    blocks = []
    for name in chain.names:
        x = chain.draws[name]
        if x.shape[1] == 1:
            headers.append(name)
        elif name.startswith("v_"):
            i = int(name.split("_")[1])
            headers += [f"v_{i}_{j + 1}" for j in range(x.shape[1])]
        else:
            headers += [f"{name}_{j + 1}" for j in range(x.shape[1])]
        blocks.append(x)
    return headers, np.hstack(blocks)


def write_draws(chain: ChainOutput, path) -> None:
    """Write kept draws to CSV (one row per kept iteration)."""
    headers, mat = _columns(chain)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(headers)
        for row in mat:
            w.writerow([f"{v:.17g}" for v in row])


def read_draws(path) -> tuple[list[str], np.ndarray]:
    """Read a draws CSV back; returns (headers, matrix)."""
    path = Path(path)
    with path.open(newline="") as fh:
        r = csv.reader(fh)
        headers = next(r)
        rows = [[float(v) for v in row] for row in r]
    return headers, np.asarray(rows, dtype=float)


def config_record(config, extra=None) -> dict:
    """JSON-serializable record of a chain configuration.

    Arrays are stored inline; the record plus the same code version is
    enough to reproduce the run bit for bit.
    """
    dm = config.data_model
    rec = {
        "family": dm.family,
        "t": dm.t,
        "n": int(config.n),
        "p": int(config.p),
        "r": int(config.r),
        "burnin": int(config.burnin),
        "iters": int(config.iters),
        "thin": int(config.thin),
        "seed": int(config.seed),
        "Z": np.asarray(config.Z, dtype=float).tolist(),
        "X": np.asarray(config.X, dtype=float).tolist(),
        "Phi": np.asarray(config.Phi, dtype=float).tolist(),
    }
    if extra:
        rec.update(extra)
    return rec


def write_sidecar(path, record: dict) -> None:
    """Write the JSON sidecar next to a draws file."""
    Path(path).write_text(json.dumps(record, indent=2) + "\n")


def read_sidecar(path) -> dict:
    return json.loads(Path(path).read_text())


def read_data_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a modeling data file with header z,x1,...,xp.

    Returns (Z, X).  An empty z cell marks a hold-out row and comes back
    as NaN; covariates must always be present.  Malformed rows raise a
    ValueError naming the offending line.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        r = csv.reader(fh)
        try:
            header = [h.strip().lower() for h in next(r)]
        except StopIteration:
            raise ValueError(f"{path}: line 1: empty file, expected a "
                             "header row") from None
        if not header or header[0] != "z":
            raise ValueError(f"{path}: line 1: first column must be 'z'")
        rows = []
        for lineno, row in enumerate(r, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: line {lineno}: expected "
                                 f"{len(header)} fields, got {len(row)}")
            try:
                z = float(row[0]) if row[0].strip() else float("nan")
                rows.append([z] + [float(c) for c in row[1:]])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric "
                                 "field") from None
    mat = np.asarray(rows, dtype=float)
    if mat.size == 0:
        raise ValueError(f"{path}: line 2: no data rows")
    return mat[:, 0], mat[:, 1:]


def data_model_from_record(rec: dict) -> DataModel:
    return DataModel(rec["family"], t=rec.get("t"))
