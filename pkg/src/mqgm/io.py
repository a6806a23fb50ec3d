"""CSV and JSON readers/writers with deterministic formatting."""

import csv
import json

import numpy as np

from .features import Dataset
from .model import EdgeSet


def _fmt(v):
    return repr(float(v))


def read_csv(path, exo=()):
    """Read a header-first CSV of numbers into a :class:`Dataset`.

    Columns named in ``exo`` become exogenous features; all other columns
    are graph variables. Empty or non-numeric cells are rejected.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file (a header row is required)")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise ValueError(f"{path}: duplicate column names")
    body = [r for r in rows[1:] if r]
    values = np.empty((len(body), len(header)))
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise ValueError(f"{path}: row {i + 2} has {len(r)} fields, expected {len(header)}")
        for j, cell in enumerate(r):
            cell = cell.strip()
            if not cell:
                raise ValueError(f"{path}: missing value in row {i + 2}, column {header[j]!r}")
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise ValueError(f"{path}: non-numeric value {cell!r} in row {i + 2}") from None
    exo = list(exo or ())
    missing = [c for c in exo if c not in header]
    if missing:
        raise ValueError(f"{path}: exogenous columns not found: {', '.join(missing)}")
    yi = [j for j, h in enumerate(header) if h not in exo]
    xi = [header.index(c) for c in exo]
    X = values[:, xi] if xi else None
    return Dataset(values[:, yi], X, names=[header[j] for j in yi], exo_names=exo or None)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])


def write_dataset_csv(path, data):
    header = list(data.names) + list(data.exo_names)
    M = data.Y if data.X is None else np.hstack([data.Y, data.X])
    write_csv(path, header, M.tolist())


def write_matrix(path, names, M):
    write_csv(path, list(names), np.asarray(M, dtype=float).tolist())


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(obj), fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def edges_to_json(edges, names):
    return {"d": edges.d, "names": list(names),
            "edges": [[int(a), int(b)] for a, b in edges.pairs()],
            "edge_names": [[names[a], names[b]] for a, b in edges.pairs()]}


def edges_from_json(obj):
    d = int(obj["d"])
    for pair in obj["edges"]:
        if len(pair) != 2 or not all(0 <= int(v) < d for v in pair) or pair[0] == pair[1]:
            raise ValueError(f"invalid edge {pair!r} for d={d}")
    return EdgeSet.from_pairs(d, [tuple(int(v) for v in p) for p in obj["edges"]])
