"""scikit-learn style wrapper around the particle-swarm calibration."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.metrics import r2_score
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .calibration import ParamBounds, PsoConfig, fit
from .dataio import MasterCurve
from .viscomodel import ModelKind, model_moduli


class FractionalMaxwellRegressor(RegressorMixin, BaseEstimator):
    """Two-branch fractional Maxwell model fitted to storage/loss moduli.

    ``X`` holds shifted angular frequencies (one column, rad/s, strictly
    ascending); ``y`` holds the storage and loss moduli (two columns, MPa).

    Parameters
    ----------
    kind : {"FMM-FMG", "FMG-FMG"}
    constrain_tau2 : bool
        Tie the second time-scale to the first through the moduli ratio.
    n_pop, n_iter, n_runs : int
        Swarm size, iterations per run and independent runs.
    bounds : dict or None
        ``{name: (lower, upper)}`` for the free parameters; defaults per kind.
    w1, w2 : float
        Weights of the storage and loss residuals.
    topology : {"ring", "global"}
    random_state : int
    n_jobs : int
        Concurrent runs; results do not depend on it.

    Attributes
    ----------
    model_ : FractionalModel
        Best model over all runs.
    result_ : FitResult
    params_ : dict
        Mean parameters over runs.
    """

    def __init__(self, kind="FMM-FMG", constrain_tau2=True, n_pop=200, n_iter=6000, n_runs=50,
                 bounds=None, w1=0.5, w2=0.5, topology="ring", random_state=0, n_jobs=1):
        self.kind = kind
        self.constrain_tau2 = constrain_tau2
        self.n_pop = n_pop
        self.n_iter = n_iter
        self.n_runs = n_runs
        self.bounds = bounds
        self.w1 = w1
        self.w2 = w2
        self.topology = topology
        self.random_state = random_state
        self.n_jobs = n_jobs

    @staticmethod
    def _frequencies(X):
        X = check_array(X, ensure_2d=False, dtype=float)
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError(f"X must have a single frequency column, got {X.shape[1]}")
            X = X[:, 0]
        return X

    def fit(self, X, y):
        X, y = check_X_y(np.reshape(X, (len(X), -1)), y, multi_output=True, dtype=float)
        if y.ndim != 2 or y.shape[1] != 2:
            raise ValueError("y must have two columns: storage and loss modulus")
        x = self._frequencies(X)
        curve = MasterCurve(x, y[:, 0], y[:, 1])
        kind = ModelKind.parse(self.kind)
        bounds = (ParamBounds(self.bounds) if self.bounds is not None
                  else ParamBounds.default(kind, self.constrain_tau2))
        cfg = PsoConfig(n_pop=self.n_pop, n_iter=self.n_iter, n_runs=self.n_runs,
                        seed=self.random_state, topology=self.topology)
        self.result_ = fit(curve, kind, bounds, cfg, self.constrain_tau2,
                           w1=self.w1, w2=self.w2, n_jobs=self.n_jobs)
        self.model_ = self.result_.best_model
        self.params_ = dict(self.result_.mean)
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        """Storage and loss moduli, shape ``(n, 2)``."""
        check_is_fitted(self, "model_")
        x = self._frequencies(X)
        e1, e2 = model_moduli(self.model_, x)
        return np.column_stack([np.atleast_1d(e1), np.atleast_1d(e2)])

    def score(self, X, y, sample_weight=None):
        """Coefficient of determination on decadic-log moduli."""
        pred = self.predict(X)
        return r2_score(np.log10(np.asarray(y, dtype=float)), np.log10(pred),
                        sample_weight=sample_weight)
