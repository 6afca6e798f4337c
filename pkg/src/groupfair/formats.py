"""JSON/CSV file formats.

Instance: ``{"k", "group_sizes", "m", "utilities"}`` with rows group-major;
entries are numbers or rational strings such as ``"2/3"`` (any string makes
the whole matrix exact). Allocation: ``{"assignment": [...]}`` with bundles
``0..k-1``. Matrix: ``{"rows", "cols", "entries"}`` or CSV whose first line
is ``rows,cols``. Colorings on disk use colors ``1..k``.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .model import Allocation, FairnessReport, Instance, Notion


def _parse_entry(v, exact: bool):
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ValueError(f"matrix entries must be numbers or rational strings, got {v!r}")
    try:
        return Fraction(v) if exact else float(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad matrix entry {v!r}") from exc


def parse_matrix_rows(rows, cols: int | None = None) -> np.ndarray:
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        raise ValueError("matrix must be a list of rows")
    width = cols if cols is not None else (len(rows[0]) if rows else 0)
    if any(len(r) != width for r in rows):
        raise ValueError("matrix rows have inconsistent lengths")
    exact = any(isinstance(v, str) for r in rows for v in r)
    if exact:
        out = np.empty((len(rows), width), dtype=object)
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                out[i, j] = _parse_entry(v, True)
        return out
    return np.array([[_parse_entry(v, False) for v in r] for r in rows], dtype=float).reshape(len(rows), width)


def matrix_entries(A: np.ndarray) -> list[list[Any]]:
    if A.dtype == object:
        return [[str(Fraction(v)) for v in row] for row in A]
    return [[float(v) for v in row] for row in A]


# ---------------------------------------------------------------- instance

def instance_to_json(inst: Instance) -> dict:
    return {
        "k": inst.k,
        "group_sizes": list(inst.group_sizes),
        "m": inst.m,
        "utilities": matrix_entries(inst.utilities),
    }


def instance_from_json(data: dict) -> Instance:
    try:
        k = int(data["k"])
        sizes = [int(s) for s in data["group_sizes"]]
        m = int(data["m"])
        rows = data["utilities"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed instance JSON: {exc}") from exc
    if len(sizes) != k:
        raise ValueError(f"k={k} but {len(sizes)} group sizes given")
    U = parse_matrix_rows(rows, m)
    return Instance(tuple(sizes), U)


def allocation_to_json(alloc: Allocation) -> dict:
    return {"assignment": [int(a) for a in alloc.assignment]}


def allocation_from_json(data: dict) -> Allocation:
    try:
        a = data["assignment"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed allocation JSON: {exc}") from exc
    if not isinstance(a, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in a):
        raise ValueError("assignment must be a list of integers")
    return Allocation(np.array(a, dtype=np.int64))


def report_to_json(rep: FairnessReport) -> dict:
    return {
        "notion": rep.notion.value,
        "c": rep.c,
        "witness": {"agent": list(rep.agent), "pair": list(rep.pair)},
    }


def report_from_json(data: dict) -> FairnessReport:
    w = data["witness"]
    return FairnessReport(Notion(data["notion"]), int(data["c"]),
                          tuple(int(v) for v in w["agent"]), tuple(int(v) for v in w["pair"]))


# ---------------------------------------------------------------- matrix & coloring

def matrix_to_json(A: np.ndarray, **meta) -> dict:
    out = {"rows": int(A.shape[0]), "cols": int(A.shape[1]), "entries": matrix_entries(A)}
    out.update(meta)
    return out


def matrix_from_json(data: dict) -> np.ndarray:
    try:
        rows, cols, entries = int(data["rows"]), int(data["cols"]), data["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    A = parse_matrix_rows(entries, cols)
    if A.shape != (rows, cols):
        raise ValueError(f"header says {rows}x{cols}, entries are {A.shape[0]}x{A.shape[1]}")
    return A


def matrix_to_csv(A: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([A.shape[0], A.shape[1]])
    for row in matrix_entries(A):
        writer.writerow([v if isinstance(v, str) else repr(v) for v in row])
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    lines = list(csv.reader(io.StringIO(text)))
    if not lines or len(lines[0]) != 2:
        raise ValueError("CSV matrix must start with a 'rows,cols' line")
    rows, cols = int(lines[0][0]), int(lines[0][1])
    # a zero-column matrix has one empty line per row
    body = lines[1:] if cols == 0 else [r for r in lines[1:] if r]
    if len(body) != rows:
        raise ValueError(f"header says {rows} rows, found {len(body)}")
    parsed = []
    for r in body:
        vals = []
        for v in r:
            try:
                vals.append(float(v))
            except ValueError:
                vals.append(v)
        parsed.append(vals)
    return parse_matrix_rows(parsed, cols).reshape(rows, cols)


def coloring_to_json(chi) -> list[int]:
    return [int(c) + 1 for c in chi]


def coloring_from_json(data) -> np.ndarray:
    if not isinstance(data, list):
        raise ValueError("coloring must be a list of colors 1..k")
    chi = np.array(data, dtype=np.int64) - 1
    if chi.size and chi.min() < 0:
        raise ValueError("colors are numbered from 1")
    return chi


# ---------------------------------------------------------------- files

def dumps(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from exc


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return matrix_from_csv(path.read_text())
    return matrix_from_json(read_json(path))


def write_matrix(path, A: np.ndarray, **meta) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        path.write_text(matrix_to_csv(A))
    else:
        write_json(path, matrix_to_json(A, **meta))


def read_instance(path) -> Instance:
    return instance_from_json(read_json(path))


def read_allocation(path) -> Allocation:
    return allocation_from_json(read_json(path))
