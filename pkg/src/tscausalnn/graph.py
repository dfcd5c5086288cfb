"""Temporal causal graph container.

``weights[i, k, j]`` is the strength of the edge from variable ``i`` at lag
column ``k`` to variable ``j`` at the current step. Columns run oldest to
newest, so column ``k`` is lag ``l_max - k`` and column ``l_max`` is the
contemporaneous block.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionError


@dataclass
class TemporalGraph:
    names: list
    l_max: int
    weights: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.names = [str(s) for s in self.names]
        self.weights = np.array(self.weights, dtype=np.float64)
        n = len(self.names)
        expected = (n, self.l_max + 1, n)
        if self.weights.shape != expected:
            raise DimensionError(f"graph weights must have shape {expected}, got {self.weights.shape}")
        if len(set(self.names)) != n:
            raise ValueError("variable names must be unique")
        if np.any(self.weights < 0) or not np.all(np.isfinite(self.weights)):
            raise ValueError("graph weights must be finite and non-negative")
        idx = np.arange(n)
        self.weights[idx, self.l_max, idx] = 0.0

    @classmethod
    def empty(cls, names, l_max):
        n = len(names)
        return cls(list(names), l_max, np.zeros((n, l_max + 1, n)))

    @classmethod
    def from_edges(cls, names, l_max, edges):
        """Build a graph from ``(source, lag, target[, weight])`` tuples.

        Sources and targets may be variable names or indices.
        """
        g = cls.empty(names, l_max)
        for edge in edges:
            src, lag, dst = edge[:3]
            w = edge[3] if len(edge) > 3 else 1.0
            i, j = g.index(src), g.index(dst)
            if not 0 <= lag <= l_max:
                raise ValueError(f"lag {lag} outside [0, {l_max}]")
            if lag == 0 and i == j:
                raise ValueError("contemporaneous self-edges are not allowed")
            g.weights[i, l_max - lag, j] = w
        return g

    @property
    def n(self):
        return len(self.names)

    def index(self, v):
        if isinstance(v, (int, np.integer)):
            if not 0 <= v < self.n:
                raise IndexError(f"variable index {v} out of range")
            return int(v)
        try:
            return self.names.index(v)
        except ValueError:
            raise KeyError(f"unknown variable {v!r}") from None

    @property
    def contemporaneous(self):
        """The ``n x n`` lag-0 block; entry ``[i, j]`` is the edge i -> j."""
        return self.weights[:, self.l_max, :]

    def edges(self):
        """Nonzero edges as ``(source_index, lag, target_index, weight)``, sorted by (source, lag, target)."""
        out = []
        for i, k, j in zip(*np.nonzero(self.weights)):
            out.append((int(i), self.l_max - int(k), int(j), float(self.weights[i, k, j])))
        out.sort(key=lambda e: (e[0], e[1], e[2]))
        return out

    def n_edges(self):
        return int(np.count_nonzero(self.weights))

    def summary(self):
        """``n x n`` binary matrix: ``[i, j] = 1`` iff any lag carries an edge i -> j."""
        return (self.weights != 0).any(axis=1).astype(np.int64)

    def copy(self):
        return TemporalGraph(list(self.names), self.l_max, self.weights.copy(), dict(self.metadata))

    def __eq__(self, other):
        if not isinstance(other, TemporalGraph):
            return NotImplemented
        return (
            self.names == other.names
            and self.l_max == other.l_max
            and np.array_equal(self.weights, other.weights)
        )


def threshold(graph, omega):
    """Binary graph keeping entries strictly greater than ``omega``."""
    if omega < 0:
        raise ValueError("threshold must be non-negative")
    out = graph.copy()
    out.weights = (graph.weights > omega).astype(np.float64)
    out.metadata["threshold"] = float(omega)
    return out


def topological_order(adj):
    """Kahn's algorithm on a square adjacency matrix (``adj[i, j] != 0`` means i -> j).

    Returns the order as a list, or ``None`` when the graph has a cycle.
    Self-loops count as cycles.
    """
    a = np.asarray(adj) != 0
    n = a.shape[0]
    indeg = a.sum(axis=0).astype(int)
    ready = [v for v in range(n) if indeg[v] == 0]
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for w in np.nonzero(a[v])[0]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(int(w))
    return order if len(order) == n else None


def is_dag(adj):
    return topological_order(adj) is not None


def remove_weakest_until_dag(graph):
    """Drop the weakest contemporaneous edges until the lag-0 block is acyclic.

    Returns ``(new_graph, removed_count)``. Edges are removed in increasing
    order of weight, skipping edges that do not lie on any remaining cycle.
    """
    g = graph.copy()
    block = g.weights[:, g.l_max, :]
    removed = 0
    while not is_dag(block):
        cyc = _edges_on_cycles(block)
        i, j = min(cyc, key=lambda e: (block[e], e))
        block[i, j] = 0.0
        removed += 1
    return g, removed


def _edges_on_cycles(block):
    a = block != 0
    n = a.shape[0]
    # reach[i, j]: a path of length >= 1 from i to j
    reach = a.copy()
    for k in range(n):
        reach = reach | (reach[:, [k]] & reach[[k], :])
    return [(i, j) for i, j in zip(*np.nonzero(a)) if i == j or reach[j, i]]
