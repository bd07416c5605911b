"""Graph file formats and report serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable

import numpy as np

from .graph import Graph, GraphError, build_graph


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = "" if line is None else f"line {line}: "
        prefix = "" if path is None else f"{path}: "
        super().__init__(f"{prefix}{where}{message}")
        self.line = line


def parse_edge_list(text: str, path: str | None = None) -> Graph:
    """First data line ``n m``, then m lines ``u v`` (0-based); ``#`` starts a comment line."""
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected two integers, got {line!r}", lineno, path)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"expected two integers, got {line!r}", lineno, path) from None
        if header is None:
            if a < 0 or b < 0:
                raise ParseError("header counts must be nonnegative", lineno, path)
            header = (a, b)
            continue
        if not (0 <= a < header[0] and 0 <= b < header[0]):
            raise ParseError(f"vertex out of range for n={header[0]}", lineno, path)
        if a == b:
            raise ParseError(f"self-loop at vertex {a}", lineno, path)
        edges.append((a, b))
    if header is None:
        raise ParseError("missing 'n m' header", None, path)
    if len(edges) != header[1]:
        raise ParseError(f"header declares {header[1]} edges, found {len(edges)}", None, path)
    return build_graph(header[0], edges)


def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"] + [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def graph_to_dict(g: Graph) -> dict:
    return {"n": g.n, "edges": [list(e) for e in g.edges], "degrees": g.degrees.tolist()}


def graph_from_dict(data: dict, path: str | None = None) -> Graph:
    try:
        n = int(data["n"])
        edges = [tuple(int(x) for x in e) for e in data["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad graph JSON: {exc}", None, path) from None
    if any(len(e) != 2 for e in edges):
        raise ParseError("every edge must have two endpoints", None, path)
    try:
        g = build_graph(n, edges)
    except GraphError as exc:
        raise ParseError(str(exc), None, path) from None
    if "degrees" in data and list(data["degrees"]) != g.degrees.tolist():
        raise ParseError("degrees field does not match the edges", None, path)
    return g


def load_graph(path: str | Path) -> Graph:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read graph file: {exc.strerror}", None, str(p)) from None
    if p.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, str(p)) from None
        return graph_from_dict(data, str(p))
    return parse_edge_list(text, str(p))


def jsonable(obj):
    """Convert numpy scalars/arrays; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False)


def to_csv(rows: Iterable[dict], fields: Iterable[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def format_text(obj, indent: int = 0) -> str:
    """Stable, key-sorted plain-text rendering of nested dicts."""
    pad = "  " * indent
    out = []
    for key in sorted(obj):
        val = obj[key]
        if isinstance(val, dict):
            out.append(f"{pad}{key}:")
            out.append(format_text(val, indent + 1))
        elif isinstance(val, float):
            out.append(f"{pad}{key}: {val:.10g}")
        else:
            out.append(f"{pad}{key}: {val}")
    return "\n".join(out)


def trajectory_csv(times: np.ndarray, states: np.ndarray) -> str:
    fields = ["t"] + [f"x_{i + 1}" for i in range(states.shape[1])]
    rows = ({"t": float(t), **{f: float(v) for f, v in zip(fields[1:], row)}} for t, row in zip(times, states))
    return to_csv(rows, fields)
