"""scikit-learn style estimator wrapping preprocessing, training and extraction."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import model as M
from . import trainer as T
from .config import RunConfig
from .exceptions import InsufficientDataError
from .preprocess import LagWindower, MinMaxNormalizer, TimeSeriesDataset, WindowedBatch

_DEFAULTS = RunConfig()


class TSCausalNN(BaseEstimator):
    """Learn a temporal causal graph (lagged and contemporaneous edges) from a multivariate series.

    Parameters mirror :class:`~tscausalnn.config.RunConfig`; ``random_state``
    seeds the weight initialisation.

    Attributes set by :meth:`fit`
    -----------------------------
    names_ : list of str
    adjacency_ : TemporalGraph
        Learned edge strengths before thresholding.
    graph_ : TemporalGraph
        Binary graph after thresholding (and cycle repair, if needed).
    result_ : FitResult
    normalizer_ : MinMaxNormalizer or None
    """

    def __init__(
        self,
        l_max=_DEFAULTS.l_max,
        latent_channels=_DEFAULTS.latent_channels,
        activation=_DEFAULTS.activation,
        variant=_DEFAULTS.variant,
        lambda_=_DEFAULTS.lambda_,
        rho=_DEFAULTS.rho,
        alpha=_DEFAULTS.alpha,
        beta=_DEFAULTS.beta,
        gamma=_DEFAULTS.gamma,
        w_threshold=_DEFAULTS.threshold,
        inner_epochs=_DEFAULTS.inner_epochs,
        max_outer=_DEFAULTS.max_outer,
        h_tol=_DEFAULTS.h_tol,
        rho_max=_DEFAULTS.rho_max,
        lr=_DEFAULTS.lr,
        normalize=_DEFAULTS.normalize,
        random_state=_DEFAULTS.seed,
    ):
        self.l_max = l_max
        self.latent_channels = latent_channels
        self.activation = activation
        self.variant = variant
        self.lambda_ = lambda_
        self.rho = rho
        self.alpha = alpha
        self.beta = beta
        self.gamma = gamma
        self.w_threshold = w_threshold
        self.inner_epochs = inner_epochs
        self.max_outer = max_outer
        self.h_tol = h_tol
        self.rho_max = rho_max
        self.lr = lr
        self.normalize = normalize
        self.random_state = random_state

    @classmethod
    def from_config(cls, config):
        d = config.to_dict()
        d["w_threshold"] = d.pop("threshold")
        d["random_state"] = d.pop("seed")
        return cls(**d)

    def run_config(self):
        return RunConfig(
            l_max=self.l_max, normalize=self.normalize, latent_channels=self.latent_channels,
            activation=self.activation, variant=self.variant, lambda_=self.lambda_, rho=self.rho,
            alpha=self.alpha, beta=self.beta, gamma=self.gamma, threshold=self.w_threshold,
            inner_epochs=self.inner_epochs, max_outer=self.max_outer, h_tol=self.h_tol,
            rho_max=self.rho_max, lr=self.lr, seed=self.random_state,
        )

    def _prepare(self, X, fitting):
        names = None
        if isinstance(X, TimeSeriesDataset):
            names, X = list(X.names), X.values
        elif hasattr(X, "columns"):
            names = [str(c) for c in X.columns]
        X = check_array(X, dtype=np.float64, ensure_min_samples=2, ensure_min_features=2)
        if X.shape[0] <= self.l_max:
            raise InsufficientDataError(f"need more than l_max={self.l_max} steps, got {X.shape[0]}")
        if fitting:
            self.normalizer_ = MinMaxNormalizer().fit(X) if self.normalize else None
        if self.normalizer_ is not None:
            X = self.normalizer_.transform(X)
        return names, X

    def fit(self, X, y=None, names=None, log_path=None):
        """Fit on a ``(T, n)`` array, DataFrame or :class:`TimeSeriesDataset`."""
        found, Xn = self._prepare(X, fitting=True)
        names = list(names) if names is not None else found or [f"x{i + 1}" for i in range(Xn.shape[1])]
        cfg = self.run_config()
        batch = WindowedBatch(LagWindower(self.l_max).transform(Xn), self.l_max, names)
        result = T.fit(batch, cfg.train_config(), cfg.model_config(Xn.shape[1]), names, log_path=log_path)
        result.graph.metadata["config"] = cfg.to_dict()
        self.names_ = names
        self.n_features_in_ = Xn.shape[1]
        self.result_ = result
        self.adjacency_ = result.weighted
        self.graph_ = result.graph
        self.state_ = result.state.model
        return self

    def predict(self, X):
        """One-step-ahead predictions for steps ``l_max .. T-1``, in the input's units."""
        check_is_fitted(self, "state_")
        _, Xn = self._prepare(X, fitting=False)
        pred = M.forward(self.state_, LagWindower(self.l_max).transform(Xn))
        if self.normalizer_ is not None:
            pred = self.normalizer_.inverse_transform(pred)
        return pred

    def score(self, X, y=None):
        """Negative mean squared one-step error on the normalised scale."""
        check_is_fitted(self, "state_")
        _, Xn = self._prepare(X, fitting=False)
        windows = LagWindower(self.l_max).transform(Xn)
        pred = M.forward(self.state_, windows)
        return -float(np.mean((pred - windows[:, :, self.l_max]) ** 2))
