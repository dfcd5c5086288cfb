"""The causal convolution network.

A shared 1x1 convolution lifts every input cell ``(variable, lag column)`` to
``latent_channels`` features with a nonlinearity. Then ``n`` parallel causal
heads, one per target variable, each apply a kernel spanning the whole
``n x (l_max + 1)`` window and produce one prediction. Because the latent
layer never mixes positions, head ``j``'s kernel slice at ``(i, k)`` is the
only route from input cell ``(i, k)`` to prediction ``j``; its channel-wise
L2 norm is read off as the edge strength.

In the ``conv1d-ablation`` variant the latent features are flattened to a
single channel (a learned channel reduction shared by all heads) and each
head applies a one-channel kernel along the flattened ``n * (l_max + 1)``
axis.

Head ``j`` never sees variable ``j`` at the current step: that kernel slice
is zeroed at init and after every update, and its gradient is zeroed.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .exceptions import DimensionError
from .graph import TemporalGraph

ACTIVATIONS = ("relu", "tanh")
VARIANTS = ("conv2d", "conv1d-ablation")
CHECKPOINT_VERSION = 1
# Latent features are divided by max(|w|, floor) so each is 1-Lipschitz in its
# input cell. Without this the latent layer could grow while head kernels
# shrink, which leaves the prediction unchanged but deflates edge strengths.
# Features are also shifted to vanish at a zero input: a channel that is
# nearly constant over [0, 1] would otherwise let kernels cancel each other
# and report strong edges that carry no signal.
LIPSCHITZ_FLOOR = 0.1


@dataclass(frozen=True)
class ModelConfig:
    n: int
    l_max: int
    latent_channels: int = 8
    activation: str = "relu"
    variant: str = "conv2d"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two variables")
        if self.l_max < 1:
            raise ValueError("l_max must be at least 1")
        if self.latent_channels < 1:
            raise ValueError("latent_channels must be at least 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if self.variant == "conv1d":
            object.__setattr__(self, "variant", "conv1d-ablation")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")

    @property
    def width(self):
        return self.l_max + 1

    @property
    def head_channels(self):
        return self.latent_channels if self.variant == "conv2d" else 1


@dataclass
class ModelState:
    """Parameters keyed by name.

    ``latent_w``, ``latent_b``: ``(C,)`` 1x1 convolution.
    ``kernel``: ``(n_heads, n, l_max + 1, head_channels)``; head first.
    ``bias``: ``(n_heads,)``.
    ``reduce``: ``(C,)`` channel reduction, conv1d variant only.
    """

    config: ModelConfig
    params: dict

    def copy(self):
        return ModelState(self.config, {k: v.copy() for k, v in self.params.items()})


def init(config, seed=0, scale=0.1):
    rng = np.random.default_rng(seed)
    C = config.latent_channels
    latent_w = rng.uniform(-scale, scale, C)
    # Place each channel's kink at a random point of the [0, 1] data range;
    # b = -w * c stays inside [-scale, scale].
    kinks = rng.uniform(0.0, 1.0, C)
    params = {
        "latent_w": latent_w,
        "latent_b": -latent_w * kinks,
        "kernel": rng.uniform(-scale, scale, (config.n, config.n, config.width, config.head_channels)),
        "bias": rng.uniform(-scale, scale, config.n),
    }
    if config.variant == "conv1d-ablation":
        params["reduce"] = rng.uniform(-scale, scale, C)
    state = ModelState(config, params)
    apply_mask(state)
    return state


def mask_index(config):
    """Index into ``kernel`` selecting every head's own contemporaneous cell."""
    h = np.arange(config.n)
    return h, h, config.l_max


def apply_mask(state):
    state.params["kernel"][mask_index(state.config)] = 0.0
    return state


def _samples(state, batch):
    x = getattr(batch, "samples", batch)
    x = np.asarray(x, dtype=np.float64)
    cfg = state.config
    if x.ndim != 3 or x.shape[1:] != (cfg.n, cfg.width):
        raise DimensionError(
            f"batch samples must be (S, {cfg.n}, {cfg.width}), got {x.shape}"
        )
    return x


def _latent_scale(w):
    return np.maximum(np.abs(w), LIPSCHITZ_FLOOR)


def _latent_scale_grad(w):
    return np.where(np.abs(w) > LIPSCHITZ_FLOOR, np.sign(w), 0.0)


def _reduce_scale(r):
    # Same role as the latent scale: keeps the reduction from trading size with the kernels.
    return max(float(np.linalg.norm(r)), LIPSCHITZ_FLOOR)


def _act(name, u):
    if name == "relu":
        return np.maximum(u, 0.0)
    return np.tanh(u)


def _act_grad(name, u, z):
    if name == "relu":
        return u > 0
    return 1.0 - z * z


def _forward(state, x):
    p = state.params
    cfg = state.config
    S = x.shape[0]
    # Cells as rows of [value, 1] so the 1x1 convolution is a single matmul.
    cells = np.empty((x.size, 2))
    cells[:, 0] = x.ravel()
    cells[:, 1] = 1.0
    u = cells @ np.vstack([p["latent_w"], p["latent_b"]])
    a = _act(cfg.activation, u)
    # Anchor every feature at zero for a zero input so no channel is a disguised bias.
    z = (a - _act(cfg.activation, p["latent_b"])) / _latent_scale(p["latent_w"])
    feats = z if cfg.variant == "conv2d" else z @ p["reduce"] / _reduce_scale(p["reduce"])
    flat = feats.reshape(S, -1)
    pred = flat @ p["kernel"].reshape(cfg.n, -1).T + p["bias"]
    return pred, (x, cells, u, a, z, flat)


def forward(state, batch):
    """Predict every variable at the target step: ``(S, n)``."""
    return _forward(state, _samples(state, batch))[0]


def forward_with_cache(state, batch):
    return _forward(state, _samples(state, batch))


def backward(state, batch, loss_grad, cache=None):
    """Gradients of a scalar loss given ``loss_grad = dLoss/dPrediction`` of shape ``(S, n)``."""
    x = _samples(state, batch)
    if cache is None:
        _, cache = _forward(state, x)
    x, cells, u, a, z, flat = cache
    cfg = state.config
    p = state.params
    g = np.asarray(loss_grad, dtype=np.float64)
    if g.shape != (x.shape[0], cfg.n):
        raise DimensionError(f"loss gradient must be ({x.shape[0]}, {cfg.n}), got {g.shape}")
    kf = p["kernel"].reshape(cfg.n, -1)
    grads = {"kernel": (g.T @ flat).reshape(p["kernel"].shape), "bias": g.sum(axis=0)}
    grads["kernel"][mask_index(cfg)] = 0.0
    dfeat = (g @ kf).reshape(-1, cfg.head_channels)
    if cfg.variant == "conv2d":
        dz = dfeat
    else:
        r = p["reduce"]
        rs = _reduce_scale(r)
        df = dfeat[:, 0]
        grads["reduce"] = z.T @ df / rs
        norm = np.linalg.norm(r)
        if norm > LIPSCHITZ_FLOOR:
            grads["reduce"] -= np.dot(df, flat.ravel()) / rs * r / norm
        dz = dfeat @ r[None, :] / rs
    scale = _latent_scale(p["latent_w"])
    du = dz * _act_grad(cfg.activation, u, a) / scale
    d_latent = cells.T @ du
    grads["latent_w"] = d_latent[0] - _latent_scale_grad(p["latent_w"]) / scale * np.einsum("nc,nc->c", dz, z)
    b = p["latent_b"]
    grads["latent_b"] = d_latent[1] - _act_grad(cfg.activation, b, _act(cfg.activation, b)) / scale * dz.sum(axis=0)
    return grads


# Convenience aliases for the ablation surface; the variant is carried by the config.
conv1d_variant_forward = forward
conv1d_variant_backward = backward


def adjacency_array(state):
    """``(n, l_max + 1, n)`` edge strengths: ``A[i, k, j] = ||kernel[j, i, k, :]||``."""
    k = state.params["kernel"]
    a = np.sqrt(np.einsum("jikc,jikc->ikj", k, k))
    idx = np.arange(state.config.n)
    a[idx, state.config.l_max, idx] = 0.0
    return a


def extract_adjacency(state, names=None):
    cfg = state.config
    names = list(names) if names is not None else [f"x{i + 1}" for i in range(cfg.n)]
    return TemporalGraph(names, cfg.l_max, adjacency_array(state))


def adjacency_vjp(state, d_adj):
    """Pull ``dObjective/dA`` back to the kernel. The subgradient at a zero slice is 0."""
    k = state.params["kernel"]
    a = np.transpose(adjacency_array(state), (2, 0, 1))[..., None]
    d = np.transpose(np.asarray(d_adj), (2, 0, 1))[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(a > 0, d * k / np.where(a > 0, a, 1.0), 0.0)
    out[mask_index(state.config)] = 0.0
    return out


def squared_adjacency_vjp(state, d_adj_sq):
    """Pull ``dObjective/d(A * A)`` back to the kernel; smooth everywhere."""
    k = state.params["kernel"]
    d = np.transpose(np.asarray(d_adj_sq), (2, 0, 1))[..., None]
    out = 2.0 * d * k
    out[mask_index(state.config)] = 0.0
    return out


def save_checkpoint(state, path):
    doc = {
        "format": "tscausalnn-checkpoint",
        "version": CHECKPOINT_VERSION,
        "config": asdict(state.config),
        "params": {
            name: {"shape": list(arr.shape), "data": [float(v) for v in arr.ravel()]}
            for name, arr in sorted(state.params.items())
        },
    }
    Path(path).write_text(json.dumps(doc, indent=1))
    return Path(path)


def load_checkpoint(path):
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != "tscausalnn-checkpoint":
        raise ValueError(f"{path} is not a checkpoint file")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')}")
    config = ModelConfig(**doc["config"])
    params = {}
    for name, entry in doc["params"].items():
        arr = np.array(entry["data"], dtype=np.float64)
        params[name] = arr.reshape(entry["shape"])
    return ModelState(config, params)
