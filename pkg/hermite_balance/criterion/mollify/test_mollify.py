# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

import numpy as np
import pytest

from hermite_balance.criterion.balance import build_dictionary
from hermite_balance.criterion.gridfn import GridFunction
from hermite_balance.criterion.mollify import (
    ante_rec_product,
    build_superkernel,
    bump,
    mollify,
    rate_kk2,
    rate_kk3,
)
from hermite_balance.criterion.mollify.mollify import _solve_moments
from hermite_balance.criterion.young_orlicz import power
from hermite_balance.exceptions import GridTooCoarse, MarginTooSmall, SingularMomentSystem

DELTAS = [0.4, 0.2, 0.1, 0.05]


def _gaussian():
    return GridFunction.from_function(lambda x: np.exp(-(x**2) / 2), -8.0, 8.0, 1601)


class TestSuperKernel:
    def test_bump_support(self):
        assert np.all(bump(np.array([1.0, 1.5, 3.0])) == 0.0)
        assert float(bump(np.array([0.0]))[0]) == pytest.approx(np.exp(-1.0))

    def test_moments_one_dimensional(self):
        kern = build_superkernel(1, 4)
        assert kern.moment((0,)) == pytest.approx(1.0, abs=1e-10)
        for j in range(1, 5):
            assert abs(kern.moment((j,))) < 1e-8

    def test_moments_two_dimensional(self):
        kern = build_superkernel(2, 4)
        assert kern.moment((0, 0)) == pytest.approx(1.0, abs=1e-8)
        for alpha in [(1, 0), (0, 1), (2, 0), (1, 1), (3, 1), (4, 0), (0, 4), (2, 2)]:
            assert abs(kern.moment(alpha)) < 1e-8

    def test_higher_moment_survives(self):
        kern = build_superkernel(1, 2)
        assert abs(kern.moment((4,))) > 1e-6

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError):
            build_superkernel(1, 13)
        with pytest.raises(ValueError):
            build_superkernel(3, 2)

    def test_singular_system(self):
        with pytest.raises(SingularMomentSystem):
            _solve_moments(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-15]]))


class TestMollify:
    def test_polynomial_reproduction(self):
        f = GridFunction.from_function(lambda x: 1 + x + x**2 - x**3 + 0.5 * x**4, -2.0, 2.0, 801)
        smoothed = mollify(f, build_superkernel(1, 4), 0.2)
        x = smoothed.axes[0]
        assert np.allclose(smoothed.values, 1 + x + x**2 - x**3 + 0.5 * x**4, atol=1e-8)

    def test_constant_reproduction(self):
        f = GridFunction((-1.0, -1.0), (1.0, 1.0), np.ones((101, 101)))
        smoothed = mollify(f, build_superkernel(2, 2), 0.2)
        assert np.allclose(smoothed.values, 1.0, atol=1e-3)

    def test_interior_crop(self):
        f = _gaussian()
        smoothed = mollify(f, build_superkernel(1, 2), 0.4)
        assert smoothed.lo[0] == pytest.approx(-7.6, abs=0.02)
        assert smoothed.hi[0] == pytest.approx(7.6, abs=0.02)

    def test_grid_too_coarse(self):
        with pytest.raises(GridTooCoarse):
            mollify(_gaussian(), build_superkernel(1, 2), 0.01)

    def test_margin_too_small(self):
        f = GridFunction.from_function(np.cos, -1.0, 1.0, 21)
        with pytest.raises(MarginTooSmall):
            mollify(f, build_superkernel(1, 2), 0.9)

    def test_delta_range(self):
        with pytest.raises(ValueError):
            mollify(_gaussian(), build_superkernel(1, 2), 1.5)


class TestRates:
    dictionary = build_dictionary(1, 3)

    @pytest.mark.parametrize("q,k", [(1, 1), (0, 2)])
    def test_kk2(self, q, k):
        slope, distances = rate_kk2(_gaussian(), build_superkernel(1, q + k), q, k, 0, power(2), DELTAS, self.dictionary)
        assert np.all(distances > 0)
        assert slope >= q + k - 0.3

    def test_kk2_kernel_order(self):
        with pytest.raises(ValueError):
            rate_kk2(_gaussian(), build_superkernel(1, 0), 1, 1, 0, power(2), DELTAS, self.dictionary)

    def test_kk3_smooth(self):
        slope, norms = rate_kk3(_gaussian(), build_superkernel(1, 2), 2, 0, 0, power(2), DELTAS)
        assert abs(slope) < 0.1
        assert np.all(np.isfinite(norms))

    def test_kk3_tent(self):
        tent = GridFunction.from_function(lambda x: np.maximum(0.0, 1 - np.abs(x)), -3.0, 3.0, 1201)
        slope, _ = rate_kk3(tent, build_superkernel(1, 0), 2, 1, 0, power(2), DELTAS)
        assert -(2 - 1) - 0.3 <= slope < -0.2

    def test_ante_rec_product_bounded(self):
        # q=0, m=1: r=1, n=2, l=2
        products = ante_rec_product(_gaussian(), build_superkernel(1, 2), 1, 2, 1, 2, power(2), DELTAS, self.dictionary)
        assert np.all(np.isfinite(products)) and products[0] > 0
        assert products.max() <= 2.0 * products[0]

    def test_ante_rec_product_needs_n_above_r(self):
        with pytest.raises(ValueError):
            ante_rec_product(_gaussian(), build_superkernel(1, 2), 2, 2, 1, 2, power(2), DELTAS, self.dictionary)
