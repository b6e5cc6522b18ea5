"""Scikit-learn style wrappers around the solver, baseline and scalers.

These follow the usual estimator contract: constructors only store
parameters, ``fit`` learns and sets trailing-underscore attributes,
``get_params``/``set_params`` come from the base class, and transforms never
mutate their input.  The functional API underneath (``solver.fit``,
``baselines.varsort_regress``, ``data.center_and_scale``) stays the primary
surface; these classes exist so the toolkit drops into pipelines and
cross-validation loops without glue code.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import solver as _solver
from .baselines import varsort_regress
from .data import Dataset, check_samples
from .graphs import ThresholdPolicy, threshold
from .losses import LossSpec, least_squares

__all__ = ["NotearsDag", "VarianceOrderDag", "ColumnScaler"]


def _as_array(X) -> np.ndarray:
    if isinstance(X, Dataset):
        return X.samples
    return check_samples(np.asarray(X, dtype=np.float64))


def _require_fitted(estimator, attribute):
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet; call fit first"
        )


class NotearsDag(BaseEstimator):
    """Continuous DAG learner with an augmented-Lagrangian solver.

    Parameters mirror SolverConfig and ThresholdPolicy; see those classes
    for semantics.  After ``fit``, ``weights_`` holds the continuous d x d
    weight matrix, ``graph_`` the thresholded DAG, ``trace_`` the
    per-inner-solve trace and ``termination_`` the stop reason.
    """

    def __init__(
        self,
        loss="least_squares",
        lam=0.0,
        sigma=None,
        omega=0.3,
        post_repair="greedy_min_weight_removal",
        rho_init=1.0,
        rho_max=1e16,
        rho_multiplier=10.0,
        alpha_init=0.0,
        h_tolerance=1e-8,
        progress_ratio=0.25,
        max_outer=100,
        memory=10,
        max_inner=500,
        gradient_tolerance=1e-7,
    ):
        self.loss = loss
        self.lam = lam
        self.sigma = sigma
        self.omega = omega
        self.post_repair = post_repair
        self.rho_init = rho_init
        self.rho_max = rho_max
        self.rho_multiplier = rho_multiplier
        self.alpha_init = alpha_init
        self.h_tolerance = h_tolerance
        self.progress_ratio = progress_ratio
        self.max_outer = max_outer
        self.memory = memory
        self.max_inner = max_inner
        self.gradient_tolerance = gradient_tolerance

    def _config(self) -> _solver.SolverConfig:
        return _solver.SolverConfig(
            loss=LossSpec(kind=self.loss, lam=self.lam, sigma=self.sigma),
            rho_init=self.rho_init,
            rho_max=self.rho_max,
            rho_multiplier=self.rho_multiplier,
            alpha_init=self.alpha_init,
            h_tolerance=self.h_tolerance,
            progress_ratio=self.progress_ratio,
            max_outer=self.max_outer,
            inner=_solver.InnerConfig(
                memory=self.memory,
                max_iterations=self.max_inner,
                gradient_tolerance=self.gradient_tolerance,
            ),
        )

    def fit(self, X, y=None):
        X = _as_array(X)
        result = _solver.fit(X, self._config())
        self.n_features_in_ = X.shape[1]
        self.result_ = result
        self.weights_ = result.weights.weights
        self.graph_ = threshold(
            result.weights, ThresholdPolicy(omega=self.omega, post_repair=self.post_repair)
        )
        self.trace_ = result.trace
        self.termination_ = result.termination
        return self

    def predict(self, X):
        """Fitted-value reconstruction X W of each column from its parents."""
        _require_fitted(self, "weights_")
        X = _as_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return X @ self.weights_

    def score(self, X, y=None):
        """Negative mean squared residual of the linear model (higher is better)."""
        _require_fitted(self, "weights_")
        X = _as_array(X)
        return -2.0 * least_squares(self.weights_, X).value


class VarianceOrderDag(BaseEstimator):
    """The variance-ordering regression baseline as an estimator.

    Sorts columns by ascending variance and regresses each on all
    lower-variance columns; coefficients with |w| > omega become edges.
    """

    def __init__(self, omega=0.3):
        self.omega = omega

    def fit(self, X, y=None):
        X = _as_array(X)
        report = varsort_regress(X, omega=self.omega)
        self.n_features_in_ = X.shape[1]
        self.report_ = report
        self.weights_ = report.baseline_weights.weights
        self.graph_ = report.baseline_graph
        self.variance_order_ = report.variance_order
        return self

    def predict(self, X):
        _require_fitted(self, "weights_")
        X = _as_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return X @ self.weights_


class ColumnScaler(TransformerMixin, BaseEstimator):
    """Column centering/scaling with the package's population-std convention.

    mode "none" passes data through, "center" subtracts the fitted column
    means, "standardize" additionally divides by the fitted population
    standard deviations, "rescale" multiplies column j by factors[j].
    Statistics are learned in ``fit`` and reused by ``transform``, so a
    scaler fitted on training data applies the training-set statistics to
    held-out data.
    """

    def __init__(self, mode="standardize", factors=None):
        self.mode = mode
        self.factors = factors

    def fit(self, X, y=None):
        X = _as_array(X)
        if self.mode not in ("none", "center", "standardize", "rescale"):
            raise ValueError(f"unknown mode {self.mode!r}")
        self.n_features_in_ = X.shape[1]
        self.means_ = X.mean(axis=0)
        self.stds_ = X.std(axis=0)
        if self.mode == "standardize" and np.any(self.stds_ == 0):
            bad = int(np.nonzero(self.stds_ == 0)[0][0])
            raise ValueError(f"column {bad} has zero variance; cannot standardize")
        if self.mode == "rescale":
            if self.factors is None:
                raise ValueError("mode 'rescale' needs factors")
            f = np.asarray(self.factors, dtype=np.float64)
            if f.shape != (X.shape[1],) or np.any(~np.isfinite(f)) or np.any(f <= 0):
                raise ValueError("factors must be positive and finite, one per column")
            self.factors_ = f
        return self

    def transform(self, X):
        _require_fitted(self, "means_")
        X = _as_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        if self.mode == "none":
            return X.copy()
        if self.mode == "center":
            return X - self.means_
        if self.mode == "standardize":
            return (X - self.means_) / self.stds_
        return X * self.factors_

    def inverse_transform(self, X):
        _require_fitted(self, "means_")
        X = _as_array(X)
        if self.mode == "none":
            return X.copy()
        if self.mode == "center":
            return X + self.means_
        if self.mode == "standardize":
            return X * self.stds_ + self.means_
        return X / self.factors_
