import itertools
import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.distance import cdist

from supportnet.geometry import (
    Box,
    annulus_index,
    diameter,
    estimate_lipschitz,
    estimate_support_box,
    in_annulus,
    metric_capacity,
)
from supportnet.masks import MaskSpec, build_cube_mask
from supportnet.targets import CATALOG, get_target


class TestBox:
    def test_cube_properties(self):
        box = Box.cube(3, 2.0)
        npt.assert_array_equal(box.lower, [-2.0] * 3)
        assert box.volume == 64.0
        assert box.diameter == pytest.approx(4.0 * math.sqrt(3.0))

    def test_from_bounds(self):
        box = Box.from_bounds([0.0, 1.0], [2.0, 5.0])
        npt.assert_array_equal(box.center, [1.0, 3.0])
        npt.assert_array_equal(box.halfwidths, [1.0, 2.0])

    def test_scalar_halfwidth_broadcasts(self):
        assert Box([0.0, 0.0, 0.0], 1.0).halfwidths.tolist() == [1.0, 1.0, 1.0]

    def test_negative_halfwidth(self):
        with pytest.raises(ValueError):
            Box([0.0], [-1.0])

    def test_grid_is_closed(self):
        G = Box.cube(2, 1.0).grid(3)
        assert G.shape == (9, 2)
        assert G.min() == -1.0 and G.max() == 1.0

    def test_contains_and_sample(self):
        box = Box.from_bounds([0.0, 0.0], [1.0, 3.0])
        X = box.sample(500, np.random.default_rng(0))
        assert box.contains(X).all()
        assert not box.contains([[2.0, 0.0]])[0]


class TestAnnulusIndex:
    @pytest.mark.parametrize("x, n", [((1.5, 0.0), 1), ((0.0, 0.0), 0), ((3.0, -3.0), 2), ((1.0, 1.0), 0),
                                      ((1.0000001, 0.0), 1), ((-2.0, 0.5), 1)])
    def test_examples(self, x, n):
        assert annulus_index(np.array(x)) == n

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=4))
    def test_membership(self, coords):
        x = np.array(coords)
        n = annulus_index(x)
        assert in_annulus(x, n)
        r = np.max(np.abs(x))
        if n > 0:
            assert n < r <= n + 1
        else:
            assert r <= 1

    def test_batch(self):
        X = np.array([[0.5, 0.0], [2.5, 0.0], [0.0, -4.0]])
        npt.assert_array_equal(annulus_index(X), [0, 2, 3])


class TestSupportBox:
    def test_mask_support(self):
        mask = build_cube_mask(MaskSpec(2, 1.0, 0.5))
        est = estimate_support_box(mask, Box.cube(2, 3.0), grid_per_axis=121)
        assert est.n_f == 2
        assert not est.effectively_zero
        npt.assert_allclose(est.tight_box.halfwidths, [1.5, 1.5], atol=0.06)

    def test_zero_function(self):
        est = estimate_support_box(get_target("zero", 2), Box.cube(2, 2.0))
        assert est.effectively_zero and est.n_f == 1 and est.tight_box is None

    def test_small_bump(self):
        def f(X):
            return np.maximum(0.0, 0.3 - np.max(np.abs(X), axis=1))

        assert estimate_support_box(f, Box.cube(2, 2.0)).n_f == 1

    def test_offset_support(self):
        def f(X):
            return np.maximum(0.0, 0.5 - np.abs(X[:, 0] - 2.0))

        assert estimate_support_box(f, Box.cube(1, 4.0), grid_per_axis=401).n_f == 3


def _capacity_bruteforce(P, radii):
    """Exhaustive version of the greedy rule: largest admissible subset for any center and radius."""
    D = cdist(P, P)
    best = 1
    for c in range(len(P)):
        for r in radii:
            cand = [i for i in range(len(P)) if D[c, i] <= 0.8 * r]
            for k in range(len(cand), best, -1):
                if any(all(D[a, b] > 0.4 * r for a, b in itertools.combinations(sub, 2))
                       for sub in itertools.combinations(cand, k)):
                    best = k
                    break
    return best


class TestCapacity:
    def test_singleton(self):
        assert metric_capacity([[0.3, 0.4]]) == 1

    def test_two_points(self):
        assert metric_capacity([[0.0], [1.0]]) == 2

    def test_unit_interval(self):
        X = np.random.default_rng(0).uniform(size=(1000, 1))
        assert metric_capacity(X) >= 3

    def test_unit_square_regression(self):
        # regression fixture recorded from this estimator
        X = np.random.default_rng(0).uniform(size=(1000, 2))
        assert metric_capacity(X) == 12

    @pytest.mark.parametrize("seed", range(4))
    def test_never_exceeds_exhaustive(self, seed):
        P = np.random.default_rng(seed).uniform(size=(7, 2))
        radii = 2.0 ** (np.arange(-24, 8) / 4)
        assert metric_capacity(P, trials=7) <= _capacity_bruteforce(P, radii)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 40), st.integers(1, 20))
    def test_monotone_under_inclusion(self, seed, m, extra):
        rng = np.random.default_rng(seed)
        P = rng.uniform(size=(m, 2))
        Q = np.vstack([P, rng.uniform(size=(extra, 2))])
        assert metric_capacity(Q, trials=8) >= metric_capacity(P, trials=8)


class TestDiameter:
    def test_examples(self):
        assert diameter([[1.0, 2.0]]) == 0.0
        assert diameter([[0.0, 0.0], [1.0, 0.0]]) == 1.0
        assert diameter([[0, 0], [0, 1], [1, 0], [1, 1]]) == pytest.approx(math.sqrt(2.0))

    def test_hull_path_matches_bruteforce(self):
        P = np.random.default_rng(1).normal(size=(5000, 2))
        sub = P[:1500]
        assert diameter(P) >= diameter(sub)
        assert diameter(sub) == pytest.approx(cdist(sub, sub).max())

    def test_empty(self):
        with pytest.raises(ValueError):
            diameter(np.zeros((0, 2)))


class TestLipschitz:
    def test_affine(self):
        est = estimate_lipschitz(lambda X: 2.0 * X[:, 0], Box.from_bounds([0.0], [1.0]))
        assert 1.999 <= est <= 2.0 + 1e-12

    def test_constant(self):
        assert estimate_lipschitz(lambda X: np.full(len(X), 3.0), Box.cube(2, 1.0)) == 0.0

    def test_max_norm(self):
        est = estimate_lipschitz(lambda X: np.max(np.abs(X), axis=1), Box.cube(2, 1.0))
        assert 0.99 <= est <= 1.0 + 1e-12

    @pytest.mark.parametrize("name", sorted(CATALOG))
    def test_catalog_never_exceeds_claim(self, name):
        spec = get_target(name, 2)
        est = estimate_lipschitz(spec, Box.cube(2, 1.5), pairs=1000)
        assert est <= spec.lipschitz + 1e-9
