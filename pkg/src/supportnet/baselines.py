"""Analytic baselines: random-features networks and polynomials, and their tails outside the support."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.linear_model import Ridge
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import PolynomialFeatures
from sklearn.utils.validation import check_array, check_is_fitted, check_random_state, check_X_y

from .geometry import Box, estimate_support_box
from .network import Activation, ActivationKind, Affine, Network
from .quadrature import QuadratureGrid, annulus_l1, difference, l1_norm, pointwise_norm
from .targets import FunctionSpec

__all__ = [
    "FitConfig",
    "RandomFeaturesRegressor",
    "PolynomialRegressor",
    "fit_random_features",
    "tail_mass",
    "separation_report",
    "TRAIN_HALFWIDTH",
    "NONTRIVIAL_WEIGHT",
]

TRAIN_HALFWIDTH = 1.5
NONTRIVIAL_WEIGHT = 1e-8


class RandomFeaturesRegressor(RegressorMixin, BaseEstimator):
    """One hidden layer with a frozen random first layer and a ridge-fitted readout.

    Hidden weights are ``N(0, feature_scale^2)``, biases ``U(-feature_scale, feature_scale)``.
    The activation must be analytic, so the fitted model is an analytic function.
    """

    def __init__(self, activation: str = "sigmoid", hidden_width: int = 64, ridge_lambda: float = 1e-6,
                 feature_scale: float = 2.0, random_state=0):
        self.activation = activation
        self.hidden_width = hidden_width
        self.ridge_lambda = ridge_lambda
        self.feature_scale = feature_scale
        self.random_state = random_state

    def _kind(self) -> ActivationKind:
        kind = ActivationKind.parse(self.activation)
        if not kind.analytic:
            raise ValueError(f"random features need an analytic activation, got {self.activation!r}")
        return kind

    def fit(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True, dtype=np.float64)
        if self.ridge_lambda < 0 or self.hidden_width < 1:
            raise ValueError("ridge_lambda must be >= 0 and hidden_width >= 1")
        kind = self._kind()
        rng = check_random_state(self.random_state)
        d = X.shape[1]
        self.hidden_weights_ = rng.normal(0.0, self.feature_scale, size=(self.hidden_width, d))
        self.hidden_bias_ = rng.uniform(-self.feature_scale, self.feature_scale, size=self.hidden_width)
        H = kind(X @ self.hidden_weights_.T + self.hidden_bias_)
        lam = self.ridge_lambda
        while True:
            ridge = Ridge(alpha=lam, solver="cholesky").fit(H, y)
            if np.all(np.isfinite(ridge.coef_)):
                break
            lam = max(10.0 * lam, 1e-12)
        self.ridge_lambda_used_ = lam
        self.coef_ = np.atleast_2d(ridge.coef_)
        self.intercept_ = np.atleast_1d(ridge.intercept_).astype(np.float64)
        self.n_features_in_ = d
        self.n_outputs_ = self.coef_.shape[0]
        self._single_output = y.ndim == 1
        return self

    @property
    def max_output_weight(self) -> float:
        check_is_fitted(self, "coef_")
        return float(np.max(np.abs(self.coef_)))

    def to_network(self) -> Network:
        check_is_fitted(self, "coef_")
        kind = self._kind()
        layers = [
            Affine(self.hidden_weights_, self.hidden_bias_),
            Activation([kind] * self.hidden_width),
            Affine(self.coef_, self.intercept_),
        ]
        return Network(self.n_features_in_, self.n_outputs_, layers)

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        Y = self.to_network()(X)
        return Y[:, 0] if self._single_output else Y


class PolynomialRegressor(RegressorMixin, BaseEstimator):
    """Ridge least squares on all monomials up to ``degree``."""

    def __init__(self, degree: int = 8, ridge_lambda: float = 1e-8):
        self.degree = degree
        self.ridge_lambda = ridge_lambda

    def fit(self, X, y):
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True, dtype=np.float64)
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        self.model_ = make_pipeline(PolynomialFeatures(self.degree, include_bias=False),
                                    Ridge(alpha=self.ridge_lambda, solver="cholesky"))
        if self.degree == 0:
            self.constant_ = np.mean(y, axis=0)
        else:
            self.model_.fit(X, y)
        self.n_features_in_ = X.shape[1]
        return self

    @property
    def max_output_weight(self) -> float:
        check_is_fitted(self, "model_")
        if self.degree == 0:
            return float(np.max(np.abs(self.constant_)))
        ridge = self.model_[-1]
        return float(max(np.max(np.abs(ridge.coef_)), np.max(np.abs(ridge.intercept_))))

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        if self.degree == 0:
            return np.broadcast_to(self.constant_, (X.shape[0],) + np.shape(self.constant_)).copy()
        return self.model_.predict(X)


@dataclass(frozen=True)
class FitConfig:
    activation: str = "sigmoid"
    hidden_width: int = 64
    feature_seed: int = 0
    ridge_lambda: float = 1e-6
    polynomial_degree: int = 8
    feature_scale: float = 2.0


def _training_data(target: FunctionSpec, train_box: Box, samples: int, seed: int):
    rng = np.random.default_rng(seed)
    X = np.vstack([train_box.sample(samples, rng), train_box.grid(max(2, int(round(samples ** (1 / train_box.d)))))])
    y = target(X)
    return X, (y[:, 0] if target.D == 1 else y)


def fit_random_features(target: FunctionSpec, cfg: FitConfig, train_box: Box | None = None,
                        samples: int = 2000) -> RandomFeaturesRegressor:
    """Fit on uniform samples plus a grid over ``train_box`` (default ``[-1.5, 1.5]^d``)."""
    box = Box.cube(target.d, TRAIN_HALFWIDTH) if train_box is None else train_box
    X, y = _training_data(target, box, samples, cfg.feature_seed)
    model = RandomFeaturesRegressor(cfg.activation, cfg.hidden_width, cfg.ridge_lambda,
                                    cfg.feature_scale, cfg.feature_seed)
    return model.fit(X, y)


def tail_mass(f, inner_halfwidth: float, outer_halfwidth: float, d: int, points_per_axis: int = 16) -> float:
    """``∫ ||f||`` over the cubic annulus between the two half-widths (midpoint rule)."""
    return annulus_l1(f, inner_halfwidth, outer_halfwidth, d, points_per_axis)


def _as_callable(model):
    if isinstance(model, Network):
        return model
    return lambda X: np.asarray(model.predict(X), dtype=np.float64)


def separation_report(target: FunctionSpec, epsilon: float = 0.25,
                      catalog=("sigmoid", "tanh", "swish", "poly:8"), relu=True, hidden_width: int = 64,
                      seed: int = 0, samples: int = 2000, max_nodes: int = 1_000_000) -> dict:
    """Compare an adjusted relu+pool network with analytic fits of the same target.

    Each row reports the sup error on the support box, the L1 error on the
    enlarged box, the tail mass on the annulus ``[outer + 0.1, outer + 1.1]``
    (``outer`` is the relu network's certified half-width, or ``n_f`` without
    one), the certificate flag and whether the fit is non-trivial.
    """
    from .pipeline import certified_approximation

    d = target.d
    scan = Box(target.support_box.center, target.support_box.halfwidths + 1.0)
    support = estimate_support_box(target, scan, grid_per_axis=max(3, min(101, int(1e6 ** (1.0 / d)))))
    n_f = support.n_f
    candidates = []
    outer = float(n_f)
    if relu:
        net, cert, _ = certified_approximation(target, epsilon, n_f, max_nodes=max_nodes)
        outer = cert.outer_halfwidth
        candidates.append(("relu+pool", net, True, 1.0))
    for entry in catalog:
        if entry.startswith("poly"):
            degree = int(entry.split(":")[1]) if ":" in entry else 8
            X, y = _training_data(target, Box.cube(d, TRAIN_HALFWIDTH), samples, seed)
            model = PolynomialRegressor(degree).fit(X, y)
            name = f"poly-deg-{degree}"
        else:
            model = fit_random_features(target, FitConfig(entry, hidden_width, seed), samples=samples)
            name = f"{entry}-{hidden_width}"
        candidates.append((name, model, False, model.max_output_weight))

    support_grid = Box.cube(d, n_f).grid(max(2, min(201, int(40_000 ** (1.0 / d)))))
    l1_grid = QuadratureGrid(Box.cube(d, n_f + 1.0), max(1, min(128, int(1e6 ** (1.0 / d)))))
    inner_tail, outer_tail = outer + 0.1, outer + 1.1
    rows = []
    for name, model, certified, weight in candidates:
        f = _as_callable(model)
        sup = float(np.max(pointwise_norm(difference(f, target), support_grid)))
        l1, _ = l1_norm(difference(f, target), l1_grid)
        tail = tail_mass(f, inner_tail, outer_tail, d)
        rows.append({
            "model": name,
            "sup_error": sup,
            "l1_error": l1,
            "tail_mass": tail,
            "certified": certified,
            "nontrivial": bool(weight > NONTRIVIAL_WEIGHT),
        })
    trivial_target = bool(support.effectively_zero)
    zero_rows = [r["model"] for r in rows if r["nontrivial"] and r["tail_mass"] == 0.0]
    separated = (not trivial_target) and relu and zero_rows == ["relu+pool"]
    return {
        "target": target.label,
        "epsilon": epsilon,
        "n_f": n_f,
        "tail_annulus": [inner_tail, outer_tail],
        "trivial_target": trivial_target,
        "separated": bool(separated),
        "rows": rows,
    }
