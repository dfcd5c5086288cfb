"""Structural comparison of predicted and true temporal graphs.

Graphs are compared as sets of directed edges. In ``full`` mode an edge is
``(source, lag, target)`` and matching is lag-exact. In ``summary`` mode all
lags collapse into a single ``source -> target`` edge (lag stored as
``None``), and a lagged self-edge becomes a self-loop.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import UsageError

MODES = ("full", "summary")


@dataclass(frozen=True)
class EdgeSet:
    mode: str
    names: tuple
    edges: frozenset

    def __post_init__(self):
        if self.mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}, got {self.mode!r}")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "edges", frozenset(self.edges))
        if self.mode == "summary" and any(e[1] is not None for e in self.edges):
            raise ValueError("summary edges carry no lag")

    def __len__(self):
        return len(self.edges)


def full_edges(graph):
    """Binary view of ``graph`` as a full-mode :class:`EdgeSet` (any nonzero weight is an edge)."""
    return EdgeSet("full", graph.names, {(i, lag, j) for i, lag, j, _ in graph.edges()})


def summarize(graph):
    """Collapse lags: ``i -> j`` is present iff some lag carries an edge ``i -> j``."""
    s = graph.summary()
    return EdgeSet("summary", graph.names, {(int(i), None, int(j)) for i, j in zip(*np.nonzero(s))})


def edge_set(graph, mode):
    if mode == "full":
        return full_edges(graph)
    if mode == "summary":
        return summarize(graph)
    raise UsageError(f"mode must be one of {MODES}, got {mode!r}")


def _check(pred, truth):
    if pred.mode != truth.mode:
        raise UsageError(f"cannot compare a {pred.mode} graph with a {truth.mode} graph")
    if pred.names != truth.names:
        raise UsageError("graphs are over different variables")


def _reversible(edge, mode):
    i, lag, j = edge
    return i != j and (mode == "summary" or lag == 0)


def shd(pred, truth):
    """Additions plus deletions, counting a flipped reversible edge once.

    Only contemporaneous edges (or any edge in summary mode) can be
    reversed; a lagged edge always points forward in time.
    """
    _check(pred, truth)
    extra = pred.edges - truth.edges
    missing = truth.edges - pred.edges
    reversals = 0
    for i, lag, j in extra:
        if _reversible((i, lag, j), pred.mode) and (j, lag, i) in missing and (j, lag, i) not in pred.edges:
            reversals += 1
    return len(extra) + len(missing) - reversals


def _counts(pred, truth):
    _check(pred, truth)
    tp = len(pred.edges & truth.edges)
    return tp, len(pred.edges) - tp, len(truth.edges) - tp


def precision_recall(pred, truth):
    tp, fp, fn = _counts(pred, truth)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return precision, recall


def f1(pred, truth):
    tp, fp, fn = _counts(pred, truth)
    # Harmonic mean of precision and recall, in a single division.
    return 2 * tp / (2 * tp + fp + fn) if tp else 0.0


def fdr(pred, truth):
    """False discovery rate; 0.0 for an empty prediction (see ``MetricReport.empty_prediction``)."""
    tp, fp, _ = _counts(pred, truth)
    return fp / (tp + fp) if tp + fp else 0.0


@dataclass(frozen=True)
class MetricReport:
    mode: str
    shd: int
    f1: float
    fdr: float
    tp: int
    fp: int
    fn: int
    empty_prediction: bool

    def as_dict(self):
        return asdict(self)

    def line(self):
        flag = " (empty prediction)" if self.empty_prediction else ""
        return (f"{self.mode}: SHD={self.shd} F1={self.f1:.4f} FDR={self.fdr:.4f} "
                f"TP={self.tp} FP={self.fp} FN={self.fn}{flag}")


def evaluate(pred_graph, truth_graph, mode="summary"):
    pred, truth = edge_set(pred_graph, mode), edge_set(truth_graph, mode)
    tp, fp, fn = _counts(pred, truth)
    return MetricReport(mode, shd(pred, truth), f1(pred, truth), fdr(pred, truth), tp, fp, fn, len(pred) == 0)
