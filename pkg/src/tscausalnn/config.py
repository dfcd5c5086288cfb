"""Resolved run configuration: model, training and preprocessing settings.

Precedence is defaults < config file < command-line flags. The defaults ship
in ``default_config.json`` next to this module.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from importlib import resources
from pathlib import Path

from .exceptions import UsageError
from .model import ModelConfig
from .trainer import TrainConfig


@dataclass(frozen=True)
class RunConfig:
    l_max: int = 5
    normalize: bool = True
    latent_channels: int = 8
    activation: str = "relu"
    variant: str = "conv2d"
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

    def train_config(self):
        names = {f.name for f in fields(TrainConfig)}
        return TrainConfig(**{k: v for k, v in asdict(self).items() if k in names})

    def model_config(self, n):
        return ModelConfig(n=n, l_max=self.l_max, latent_channels=self.latent_channels,
                           activation=self.activation, variant=self.variant)

    def to_dict(self):
        return asdict(self)

    def updated(self, **overrides):
        known = {f.name: f for f in fields(self)}
        clean = {}
        for key, value in overrides.items():
            if value is None:
                continue
            key = "lambda_" if key in ("lambda", "lambda1") else key
            if key not in known:
                raise UsageError(f"unknown config field {key!r}")
            clean[key] = _coerce(known[key].type, value, key)
        return RunConfig(**{**asdict(self), **clean})


def _coerce(typ, value, key):
    try:
        if typ in ("bool", bool):
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
        if typ in ("int", int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if typ in ("float", float):
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise UsageError(f"bad value {value!r} for {key}") from None


def default_config():
    text = resources.files("tscausalnn").joinpath("default_config.json").read_text()
    return RunConfig().updated(**json.loads(text))


def load_config(path, base=None):
    """Read a config file; also accepts a graph file and reuses its embedded config."""
    base = base or default_config()
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if isinstance(doc, dict) and "schema" in doc:
        doc = doc.get("metadata", {}).get("config")
        if doc is None:
            raise UsageError(f"{path} carries no embedded config")
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: config must be a JSON object")
    return base.updated(**doc)
