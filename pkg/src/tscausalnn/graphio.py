"""Graph files, DOT rendering and adjacency-matrix CSV export.

Graph file (JSON, ``schema_version`` 1)::

    {
      "schema": "tscausalnn.graph",
      "schema_version": 1,
      "variables": ["S1", "S2", ...],
      "l_max": 5,
      "edges": [{"from": "S1", "lag": 1, "to": "S2", "weight": 0.73}, ...],
      "metadata": {"threshold": 0.3, "seed": 0, "acyclicity_reached": true,
                   "edges_removed": 0, ...}
    }

Edges are sorted by (from index, lag, to index). ``lag`` 0 is a
contemporaneous edge. Weights are written with full double precision so a
round trip is exact.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import GraphParseError
from .graph import TemporalGraph

SCHEMA = "tscausalnn.graph"
SCHEMA_VERSION = 1


def graph_to_dict(graph):
    return {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "variables": list(graph.names),
        "l_max": graph.l_max,
        "edges": [
            {"from": graph.names[i], "lag": lag, "to": graph.names[j], "weight": w}
            for i, lag, j, w in graph.edges()
        ],
        "metadata": dict(graph.metadata),
    }


def write_graph(graph, path):
    path = Path(path)
    path.write_text(json.dumps(graph_to_dict(graph), indent=2, sort_keys=False, default=_jsonable) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def graph_from_dict(doc, source="<graph>"):
    def fail(where, msg):
        raise GraphParseError(f"{source}: {where}: {msg}")

    if not isinstance(doc, dict):
        fail("top level", "expected an object")
    if doc.get("schema") != SCHEMA:
        fail("schema", f"expected {SCHEMA!r}, got {doc.get('schema')!r}")
    if doc.get("schema_version") != SCHEMA_VERSION:
        fail("schema_version", f"unsupported version {doc.get('schema_version')!r}")
    names = doc.get("variables")
    if not isinstance(names, list) or not all(isinstance(s, str) for s in names) or not names:
        fail("variables", "expected a non-empty list of names")
    if len(set(names)) != len(names):
        fail("variables", "duplicate variable names")
    l_max = doc.get("l_max")
    if not isinstance(l_max, int) or isinstance(l_max, bool) or l_max < 0:
        fail("l_max", "expected a non-negative integer")
    edges = doc.get("edges")
    if not isinstance(edges, list):
        fail("edges", "expected a list")
    index = {s: k for k, s in enumerate(names)}
    weights = np.zeros((len(names), l_max + 1, len(names)))
    for k, e in enumerate(edges):
        where = f"edges[{k}]"
        if not isinstance(e, dict):
            fail(where, "expected an object")
        for key in ("from", "lag", "to", "weight"):
            if key not in e:
                fail(where, f"missing {key!r}")
        if e["from"] not in index:
            fail(where + ".from", f"unknown variable {e['from']!r}")
        if e["to"] not in index:
            fail(where + ".to", f"unknown variable {e['to']!r}")
        lag = e["lag"]
        if not isinstance(lag, int) or isinstance(lag, bool) or not 0 <= lag <= l_max:
            fail(where + ".lag", f"lag must be an integer in [0, {l_max}]")
        w = e["weight"]
        if not isinstance(w, (int, float)) or isinstance(w, bool) or not math.isfinite(w) or w < 0:
            fail(where + ".weight", "weight must be a finite non-negative number")
        i, j = index[e["from"]], index[e["to"]]
        if lag == 0 and i == j:
            fail(where, "contemporaneous self-edge")
        weights[i, l_max - lag, j] = float(w)
    meta = doc.get("metadata", {})
    if not isinstance(meta, dict):
        fail("metadata", "expected an object")
    return TemporalGraph(names, l_max, weights, dict(meta))


def read_graph(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GraphParseError(f"{path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return graph_from_dict(doc, str(path))


def _node(name, lag):
    return f"{name}[t]" if lag == 0 else f"{name}[t-{lag}]"


def _fmt(w):
    return f"{w:.4g}"


def to_dot(graph, mode="summary"):
    """Render as a Graphviz digraph.

    Summary mode has one node per variable and labels each edge with the
    lags that support it. Full mode has one node per (variable, lag) and
    labels edges with their weight when the graph is not binary.
    """
    binary = bool(np.all(np.isin(graph.weights, (0.0, 1.0))))
    lines = [f"digraph {'summary' if mode == 'summary' else 'temporal'} {{", "  rankdir=LR;"]
    if mode == "summary":
        for name in graph.names:
            lines.append(f'  "{name}";')
        lags = {}
        for i, lag, j, w in graph.edges():
            lags.setdefault((i, j), []).append(lag)
        for (i, j), ls in sorted(lags.items()):
            label = ",".join(str(x) for x in sorted(ls))
            lines.append(f'  "{graph.names[i]}" -> "{graph.names[j]}" [label="lag {label}"];')
    elif mode == "full":
        for lag in range(graph.l_max, -1, -1):
            for name in graph.names:
                lines.append(f'  "{_node(name, lag)}";')
        for i, lag, j, w in graph.edges():
            attr = "" if binary else f' [label="{_fmt(w)}"]'
            lines.append(f'  "{_node(graph.names[i], lag)}" -> "{_node(graph.names[j], 0)}"{attr};')
    else:
        raise ValueError(f"unknown mode {mode!r}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def adjacency_matrix(graph, mode="full"):
    """``(rows, column_labels, matrix)``: rows are targets, columns parents.

    Full mode columns are grouped by variable with the oldest lag first, so
    column ``i * (l_max + 1) + k`` is variable ``i`` at lag ``l_max - k``.
    """
    rows = list(graph.names)
    if mode == "summary":
        return rows, list(graph.names), graph.summary().T.astype(np.float64)
    if mode != "full":
        raise ValueError(f"unknown mode {mode!r}")
    cols = [_node(name, graph.l_max - k) for name in graph.names for k in range(graph.l_max + 1)]
    mat = np.transpose(graph.weights, (2, 0, 1)).reshape(graph.n, -1)
    return rows, cols, mat


def to_adjacency_csv(graph, mode="full"):
    rows, cols, mat = adjacency_matrix(graph, mode)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["target"] + cols)
    for name, row in zip(rows, mat):
        w.writerow([name] + [repr(float(v)) if v not in (0.0, 1.0) else str(int(v)) for v in row])
    return buf.getvalue()
