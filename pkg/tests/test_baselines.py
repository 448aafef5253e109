import numpy as np
import numpy.testing as npt
import pytest
from sklearn.base import clone

from supportnet.baselines import (
    FitConfig,
    PolynomialRegressor,
    RandomFeaturesRegressor,
    fit_random_features,
    separation_report,
    tail_mass,
)
from supportnet.network import Network
from supportnet.targets import get_target


def _data(seed=0, n=400):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(n, 2))
    return X, np.sin(2 * X[:, 0]) + X[:, 1] ** 2


class TestRandomFeatures:
    def test_fit_is_reproducible(self):
        X, y = _data()
        a = RandomFeaturesRegressor("tanh", 32, random_state=3).fit(X, y).predict(X)
        b = RandomFeaturesRegressor("tanh", 32, random_state=3).fit(X, y).predict(X)
        npt.assert_array_equal(a, b)

    def test_fits_smooth_target(self):
        X, y = _data()
        model = RandomFeaturesRegressor("sigmoid", 64).fit(X, y)
        assert model.score(X, y) > 0.99

    def test_network_matches_predict(self):
        X, y = _data()
        model = RandomFeaturesRegressor("swish", 16).fit(X, y)
        net = model.to_network()
        assert isinstance(net, Network)
        npt.assert_allclose(net(X)[:, 0], model.predict(X), rtol=0, atol=0)

    def test_multi_output(self):
        X, y = _data()
        Y = np.stack([y, -y], axis=1)
        model = RandomFeaturesRegressor("tanh", 16).fit(X, Y)
        assert model.predict(X).shape == (400, 2)

    def test_rejects_relu(self):
        X, y = _data()
        with pytest.raises(ValueError, match="analytic"):
            RandomFeaturesRegressor("relu").fit(X, y)

    def test_rejects_bad_params(self):
        X, y = _data()
        with pytest.raises(ValueError):
            RandomFeaturesRegressor(ridge_lambda=-1.0).fit(X, y)

    def test_clone(self):
        model = clone(RandomFeaturesRegressor("tanh", 8, feature_scale=0.5))
        assert model.get_params()["feature_scale"] == 0.5

    def test_zero_target_gives_trivial_weights(self):
        X, _ = _data()
        model = RandomFeaturesRegressor("sigmoid", 16).fit(X, np.zeros(len(X)))
        assert model.max_output_weight <= 1e-8


class TestPolynomial:
    def test_recovers_quadratic(self):
        X, _ = _data()
        y = 1 + X[:, 0] * X[:, 1] - 2 * X[:, 1] ** 2
        model = PolynomialRegressor(2, ridge_lambda=1e-12).fit(X, y)
        npt.assert_allclose(model.predict(X), y, atol=1e-8)

    def test_degree_zero_is_mean(self):
        X, y = _data()
        npt.assert_allclose(PolynomialRegressor(0).fit(X, y).predict(X[:3]), np.mean(y))

    def test_negative_degree(self):
        X, y = _data()
        with pytest.raises(ValueError):
            PolynomialRegressor(-1).fit(X, y)


def test_fit_random_features_on_bump():
    model = fit_random_features(get_target("bump", 2), FitConfig("tanh", 64))
    assert model.max_output_weight > 1e-8
    assert model.n_features_in_ == 2


def test_tail_mass_constant():
    # cubic annulus [1.1, 2.1] in 2-D has area 4 (2.1^2 - 1.1^2)
    value = tail_mass(lambda X: np.ones(len(X)), 1.1, 2.1, 2)
    assert value == pytest.approx(4 * (2.1**2 - 1.1**2), rel=1e-12)


@pytest.fixture(scope="module")
def bump_report():
    return separation_report(get_target("bump", 2), 0.25)


def test_separation_on_bump(bump_report):
    rows = {r["model"]: r for r in bump_report["rows"]}
    assert rows["relu+pool"]["tail_mass"] == 0.0
    assert rows["relu+pool"]["certified"]
    for name in ("sigmoid-64", "tanh-64", "swish-64", "poly-deg-8"):
        assert rows[name]["nontrivial"]
        assert rows[name]["tail_mass"] > 1e-12
    assert bump_report["separated"] and not bump_report["trivial_target"]


def test_relu_row_is_accurate(bump_report):
    row = bump_report["rows"][0]
    assert row["model"] == "relu+pool" and row["sup_error"] <= 0.25


def test_tail_annulus_sits_outside_certified_box(bump_report):
    inner, outer = bump_report["tail_annulus"]
    assert outer - inner == pytest.approx(1.0)
    assert inner > bump_report["n_f"]


def test_zero_target_is_not_separated():
    report = separation_report(get_target("zero", 2), 0.5, catalog=("tanh",), hidden_width=8, samples=200)
    assert report["trivial_target"] and not report["separated"]
    assert not report["rows"][1]["nontrivial"]
