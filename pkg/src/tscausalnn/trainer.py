"""Augmented Lagrangian training loop.

The objective is

    L + rho/2 * h**2 + alpha * h + lambda * sum(A)

where ``L`` is the summed squared prediction error averaged over samples,
``A`` the extracted adjacency and ``h`` the acyclicity function of its
contemporaneous block. After each outer iteration rho grows by ``(1 + beta)``
when ``h`` failed to shrink below ``gamma`` times its previous value, and
alpha takes a dual ascent step ``alpha += rho_old * h``.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import model as M
from .exceptions import DivergenceError
from .graph import remove_weakest_until_dag, threshold
from .numerics import AdamState, adam_step, expm

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    lambda_: float = 3e-4
    rho: float = 1.0
    alpha: float = 0.0
    beta: float = 0.1
    gamma: float = 0.25
    threshold: float = 0.3
    inner_epochs: int = 300
    max_outer: int = 100
    h_tol: float = 1e-8
    rho_max: float = 1e16
    lr: float = 1e-2
    seed: int = 0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if self.lambda_ < 0:
            raise ValueError("lambda must be non-negative")
        if not self.rho > 0:
            raise ValueError("initial rho must be positive")
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")
        if self.inner_epochs < 1 or self.max_outer < 1:
            raise ValueError("epoch counts must be positive")


@dataclass
class TrainState:
    model: M.ModelState
    rho: float
    alpha: float
    h_prev: float = math.inf
    outer_iteration: int = 0
    history: list = field(default_factory=list)
    optim: dict = field(default_factory=dict)

    def copy(self):
        return replace(self, model=self.model.copy(), history=list(self.history), optim=dict(self.optim))


@dataclass
class FitResult:
    graph: object
    weighted: object
    state: TrainState
    stop_reason: str
    acyclicity_reached: bool
    edges_removed: int


def new_state(model_state, config):
    optim = {k: AdamState.fresh(v.shape, lr=config.lr) for k, v in model_state.params.items()}
    return TrainState(model_state, float(config.rho), float(config.alpha), optim=optim)


def lagrangian(L, h, l1, rho, alpha, lambda_):
    """Total objective from its parts."""
    return L + 0.5 * rho * h * h + alpha * h + lambda_ * l1


def update_multipliers(rho, alpha, h_new, h_prev, beta, gamma):
    """Return the next ``(rho, alpha)``; alpha's step uses the rho in force before the update."""
    new_rho = (1.0 + beta) * rho if h_new > gamma * h_prev else rho
    return new_rho, alpha + rho * h_new


def _contemp(adj, l_max):
    return adj[:, l_max, :]


def _evaluate(mstate, batch, rho, alpha, lambda_, with_grads=True):
    x = M._samples(mstate, batch)
    l_max = mstate.config.l_max
    pred, cache = M.forward_with_cache(mstate, x)
    resid = pred - x[:, :, l_max]
    S = x.shape[0]
    loss = float(np.sum(resid * resid)) / S
    adj = M.adjacency_array(mstate)
    wc = _contemp(adj, l_max)
    e = expm(wc * wc)
    h = max(float(np.trace(e)) - wc.shape[0], 0.0)
    l1 = float(adj.sum())
    total = lagrangian(loss, h, l1, rho, alpha, lambda_)
    parts = {"L": loss, "h": h, "l1": l1}
    if not with_grads:
        return total, parts, None
    grads = M.backward(mstate, x, 2.0 * resid / S, cache)
    grads["kernel"] += M.adjacency_vjp(mstate, np.full(adj.shape, lambda_))
    # dh/d(W * W) = exp(W * W).T
    coef = rho * h + alpha
    if coef != 0.0:
        d_sq = np.zeros(adj.shape)
        d_sq[:, l_max, :] = coef * e.T
        grads["kernel"] += M.squared_adjacency_vjp(mstate, d_sq)
    return total, parts, grads


def objective(state, batch, config):
    """Return ``(total, {"L", "h", "l1"})`` at the current state."""
    total, parts, _ = _evaluate(state.model, batch, state.rho, state.alpha, config.lambda_, False)
    return total, parts


def _mask_ok(mstate):
    return bool(np.all(mstate.params["kernel"][M.mask_index(mstate.config)] == 0.0))


def outer_step(state, batch, config, trace=None):
    """Run ``inner_epochs`` full-batch Adam steps then update rho and alpha.

    If ``trace`` is a list, the objective before each inner step is appended to it.
    """
    state = state.copy()
    mstate = state.model
    last_good = state.copy()
    for epoch in range(config.inner_epochs):
        total, parts, grads = _evaluate(mstate, batch, state.rho, state.alpha, config.lambda_)
        if not math.isfinite(total) or not all(np.all(np.isfinite(g)) for g in grads.values()):
            raise DivergenceError(
                f"non-finite objective at outer iteration {state.outer_iteration + 1}, epoch {epoch}",
                last_state=last_good,
            )
        if trace is not None:
            trace.append(total)
        for name, g in grads.items():
            mstate.params[name], state.optim[name] = adam_step(mstate.params[name], g, state.optim[name])
        M.apply_mask(mstate)
    total, parts, _ = _evaluate(mstate, batch, state.rho, state.alpha, config.lambda_, False)
    if not math.isfinite(total):
        raise DivergenceError(
            f"non-finite objective after outer iteration {state.outer_iteration + 1}",
            last_state=last_good,
        )
    h_new = parts["h"]
    state.rho, state.alpha = update_multipliers(state.rho, state.alpha, h_new, state.h_prev,
                                                config.beta, config.gamma)
    state.h_prev = h_new
    state.outer_iteration += 1
    state.history.append({
        "iteration": state.outer_iteration,
        "L": parts["L"],
        "h": h_new,
        "l1": parts["l1"],
        "rho": state.rho,
        "alpha": state.alpha,
        "objective": total,
        "mask_ok": _mask_ok(mstate),
    })
    return state


def fit(batch, config=None, model_config=None, names=None, log_path=None, callback=None):
    """Train from scratch on a windowed batch; returns a :class:`FitResult`."""
    config = config or TrainConfig()
    if model_config is None:
        model_config = M.ModelConfig(n=batch.samples.shape[1], l_max=batch.l_max)
    names = list(names if names is not None else getattr(batch, "names", None) or
                 [f"x{i + 1}" for i in range(model_config.n)])
    state = new_state(M.init(model_config, seed=config.seed), config)
    logf = open(log_path, "w") if log_path is not None else None
    reason = "max_outer"
    try:
        for _ in range(config.max_outer):
            state = outer_step(state, batch, config)
            rec = state.history[-1]
            log.debug("outer %(iteration)d: L=%(L).6g h=%(h).3g rho=%(rho).3g alpha=%(alpha).3g", rec)
            if logf is not None:
                logf.write(json.dumps(rec) + "\n")
                logf.flush()
            if callback is not None:
                callback(state)
            if rec["h"] < config.h_tol:
                reason = "h_tol"
                break
            if state.rho > config.rho_max:
                reason = "rho_max"
                break
    finally:
        if logf is not None:
            logf.close()
    weighted = M.extract_adjacency(state.model, names)
    graph = threshold(weighted, config.threshold)
    reached = state.history[-1]["h"] < config.h_tol
    graph, removed = remove_weakest_until_dag(graph) if not reached else (graph, 0)
    if removed:
        # Rank by learned strength rather than the binary view.
        graph = threshold(weighted, config.threshold)
        masked = graph.copy()
        masked.weights = graph.weights * weighted.weights
        pruned, removed = remove_weakest_until_dag(masked)
        graph.weights = (pruned.weights > 0).astype(np.float64)
        log.warning("acyclicity not reached; removed %d contemporaneous edge(s)", removed)
    graph.metadata.update({
        "threshold": config.threshold,
        "seed": config.seed,
        "acyclicity_reached": reached,
        "edges_removed": removed,
        "stop_reason": reason,
        "variant": model_config.variant,
    })
    return FitResult(graph, weighted, state, reason, reached, removed)


def config_dict(config):
    return asdict(config)
