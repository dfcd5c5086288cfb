"""Temporal causal discovery with a causally masked convolutional network.

Typical use::

    from tscausalnn import TSCausalNN
    est = TSCausalNN(l_max=5).fit(X)     # X: (T, n) array
    est.graph_.edges()                   # [(src, lag, dst, 1.0), ...]
"""
from .estimator import TSCausalNN
from .graph import TemporalGraph, threshold
from .preprocess import TimeSeriesDataset, WindowedBatch

__all__ = ["TSCausalNN", "TemporalGraph", "TimeSeriesDataset", "WindowedBatch", "threshold"]
__version__ = "0.1.0"
