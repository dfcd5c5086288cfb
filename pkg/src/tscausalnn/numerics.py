"""Dense float64 arithmetic, the trace-exponential acyclicity function and Adam.

Tensors are plain ``numpy.ndarray`` objects of dtype float64. The helpers here
add the shape checks and finiteness guarantees the rest of the package relies
on; everything is a pure function of its arguments.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DimensionError

_TAYLOR_TERMS = 18
_SCALED_NORM = 0.5


def as_tensor(data, name="tensor"):
    """Copy ``data`` into a float64 array, rejecting NaN and Inf."""
    arr = np.array(data, dtype=np.float64)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def _check_square(a, what):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{what} expects a square matrix, got shape {a.shape}")


def matmul(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError(f"matmul expects 2-d operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    return a @ b


def expm(a):
    """Matrix exponential by scaling and squaring of a truncated Taylor series.

    The matrix is scaled by ``2**-s`` until its infinity norm drops below 0.5,
    the series is summed to degree 18 with Horner's rule, and the result is
    squared ``s`` times.
    """
    a = np.asarray(a, dtype=np.float64)
    _check_square(a, "expm")
    n = a.shape[0]
    norm = np.abs(a).sum(axis=1).max() if n else 0.0
    squarings = 0
    if norm >= _SCALED_NORM:
        squarings = int(np.ceil(np.log2(norm / _SCALED_NORM))) + 1
    scaled = a / (2.0 ** squarings)
    eye = np.eye(n)
    result = eye.copy()
    for k in range(_TAYLOR_TERMS, 0, -1):
        result = eye + (scaled @ result) / k
    for _ in range(squarings):
        result = result @ result
    return result


def trace_expm(a):
    """Return ``tr(exp(a))`` for a square matrix."""
    return float(np.trace(expm(a)))


def acyclicity_h(w_contemp):
    """``tr(exp(W * W)) - n``; zero exactly when the weighted digraph of W has no cycle."""
    w = np.asarray(w_contemp, dtype=np.float64)
    _check_square(w, "acyclicity_h")
    # Guard against tiny negative round-off so the result stays >= 0.
    return max(trace_expm(w * w) - w.shape[0], 0.0)


def acyclicity_grad(w_contemp):
    """Gradient of :func:`acyclicity_h`: ``exp(W * W).T * 2W``."""
    w = np.asarray(w_contemp, dtype=np.float64)
    _check_square(w, "acyclicity_grad")
    return expm(w * w).T * 2.0 * w


def acyclicity_h_and_grad(w_contemp):
    """Both quantities from a single exponential."""
    w = np.asarray(w_contemp, dtype=np.float64)
    _check_square(w, "acyclicity_h")
    e = expm(w * w)
    return max(float(np.trace(e)) - w.shape[0], 0.0), e.T * 2.0 * w


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def fresh(cls, shape, lr=1e-2, beta1=0.9, beta2=0.999, eps=1e-8):
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        return cls(np.zeros(shape), np.zeros(shape), 0, lr, beta1, beta2, eps)


def adam_step(param, grad, state):
    """One bias-corrected Adam update. Returns ``(new_param, new_state)``."""
    param = np.asarray(param, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if param.shape != grad.shape or state.m.shape != param.shape or state.v.shape != param.shape:
        raise DimensionError(
            f"adam_step shapes differ: param {param.shape}, grad {grad.shape}, "
            f"moments {state.m.shape}/{state.v.shape}"
        )
    t = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    new_param = param - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_param, replace(state, m=m, v=v, step=t)
