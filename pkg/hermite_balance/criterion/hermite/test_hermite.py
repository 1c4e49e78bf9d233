# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

import math
from types import SimpleNamespace

import numpy as np
import pytest
from numpy.polynomial.hermite import hermval
from scipy import stats

from hermite_balance.criterion.gridfn import GridFunction, rng_stream
from hermite_balance.criterion.hermite import (
    CutoffA,
    block_convolve,
    block_kernel,
    build_blocks,
    eigen_check,
    hermite_h,
    iter_hermite_derivative,
    kernel_bound_ratio,
    orthonormality_defect,
    ratio_trend,
    reconstruct,
    reconstruction_residuals,
    regularize,
)
from hermite_balance.exceptions import LevelTooLarge


def _lattice(lo, hi, n):
    return GridFunction.from_function(lambda *c: np.zeros_like(c[0]), lo, hi, n)


class TestHermiteFunctions:
    def test_seed_value(self):
        assert float(hermite_h(0, 0.0)) == pytest.approx(0.751126, abs=1e-6)

    def test_direct_formula(self):
        t = np.array([0.5, 1.0, 2.0])
        n = 5
        coefficients = [0] * n + [1]
        direct = hermval(t, coefficients) * np.exp(-(t**2) / 2) / math.sqrt(2**n * math.factorial(n) * math.sqrt(math.pi))
        assert np.allclose(hermite_h(n, t), direct, rtol=1e-12, atol=1e-15)

    def test_orthonormality(self):
        assert orthonormality_defect(64, 129) < 1e-8

    def test_large_index_far_out(self):
        values = hermite_h(4000, np.array([0.0, 40.0, 120.0]))
        assert np.all(np.isfinite(values))
        assert values[2] == 0.0
        assert abs(values[1]) < 1.0

    def test_derivatives(self):
        t = np.linspace(-3, 3, 7)
        step = 1e-5
        for order in (1, 2):
            for n, d in iter_hermite_derivative(t, 6, order):
                if order == 1:
                    numeric = (hermite_h(n, t + step) - hermite_h(n, t - step)) / (2 * step)
                else:
                    numeric = (hermite_h(n, t + step) - 2 * hermite_h(n, t) + hermite_h(n, t - step)) / step**2
                assert np.allclose(d, numeric, atol=1e-5)


class TestCutoff:
    a = CutoffA()

    def test_support(self):
        t = np.array([0.0, 0.1, 0.25, 4.0, 7.0])
        assert np.all(self.a(t) == 0.0)
        assert self.a(1.0) == 1.0

    def test_pairing(self):
        assert self.a.pairing_defect() < 1e-10

    def test_partition_of_unity(self):
        assert self.a.partition_defect(6) < 1e-10

    def test_norm_is_finite(self):
        assert np.isfinite(self.a.norm(2))


class TestBlocks:
    def test_coefficient_support(self):
        blocks = build_blocks(1, 4)
        for n in range(5):
            lo, hi = blocks.index_range(n)
            w = blocks.weight_vector(n)
            outside = np.r_[np.arange(lo), np.arange(hi + 1, len(w))]
            assert np.all(w[outside] == 0.0)

    def test_far_blocks_share_no_level(self):
        blocks = build_blocks(1, 4)
        assert blocks.shared_levels(0, 2) == []
        assert blocks.shared_levels(1, 3) == []
        assert blocks.shared_levels(1, 2) != []

    def test_budget(self):
        with pytest.raises(LevelTooLarge):
            build_blocks(2, 4)
        with pytest.raises(LevelTooLarge):
            build_blocks(3)
        with pytest.raises(LevelTooLarge):
            build_blocks(1, 2).weight_vector(3)


class TestBlockKernel:
    blocks = build_blocks(1, 3)

    def test_origin_value(self):
        expected = CutoffA()(2.0) * float(hermite_h(2, 0.0)) ** 2
        assert float(block_kernel(self.blocks, 0, 0.0, 0.0)) == pytest.approx(expected, rel=1e-12)

    def test_symmetry(self):
        rng = rng_stream(1, "kernel-symmetry")
        x, y = rng.uniform(-4, 4, (2, 50))
        assert np.array_equal(block_kernel(self.blocks, 2, x, y), block_kernel(self.blocks, 2, y, x))

    def test_trace(self):
        grid = _lattice(-12.0, 12.0, 4001)
        x = grid.axes[0]
        diagonal = grid.with_values(block_kernel(self.blocks, 1, x, x))
        assert diagonal.integrate() == pytest.approx(self.blocks.weight_vector(1).sum(), rel=1e-8)

    def test_two_dimensional(self):
        blocks = build_blocks(2, 1)
        rng = rng_stream(2, "kernel-2d")
        x = rng.uniform(-2, 2, (20, 2))
        y = rng.uniform(-2, 2, (20, 2))
        assert np.array_equal(block_kernel(blocks, 1, x, y), block_kernel(blocks, 1, y, x))

        weights = blocks.weight_vector(0)
        h0 = [float(hermite_h(j, 0.0)) ** 2 for j in range(4)]
        expected = sum(weights[j] * sum(h0[a] * h0[j - a] for a in range(j + 1)) for j in range(4))
        assert float(block_kernel(blocks, 0, np.zeros((1, 2)), np.zeros((1, 2)))[0]) == pytest.approx(expected, rel=1e-12)


class TestBlockConvolve:
    blocks = build_blocks(1, 3)
    grid = _lattice(-10.0, 10.0, 2001)

    def test_single_level(self):
        h2 = self.grid.with_values(hermite_h(2, self.grid.axes[0]))
        out = block_convolve(self.blocks, 0, h2)
        assert np.allclose(out.values, CutoffA()(2.0) * h2.values, atol=1e-10)

    def test_level_outside_block(self):
        h20 = self.grid.with_values(hermite_h(20, self.grid.axes[0]))
        assert np.max(np.abs(block_convolve(self.blocks, 0, h20).values)) < 1e-10

    def test_disjoint_blocks(self):
        x = self.grid.axes[0]
        f = self.grid.with_values(np.exp(-((x - 1) ** 2)))
        inner = block_convolve(self.blocks, 0, f)
        assert np.max(np.abs(block_convolve(self.blocks, 2, inner).values)) < 1e-10
        assert np.max(np.abs(block_convolve(self.blocks, 3, block_convolve(self.blocks, 1, f)).values)) < 1e-10

    def test_two_dimensional_single_level(self):
        blocks = build_blocks(2, 1)
        grid = _lattice((-8.0, -8.0), (8.0, 8.0), (161, 161))
        x, y = grid.mesh()
        f = grid.with_values(hermite_h(1, x) * hermite_h(1, y))
        out = block_convolve(blocks, 0, f)
        assert np.allclose(out.values, CutoffA()(2.0) * f.values, atol=1e-9)


class TestReconstruction:
    def test_residuals_decrease_to_tolerance(self):
        blocks = build_blocks(1, 6)
        f = GridFunction.from_function(lambda x: np.exp(-2 * (x - 1) ** 2), -10.0, 10.0, 2001)
        residuals = reconstruction_residuals(blocks, f, 6)
        assert residuals[-1] < 1e-3
        assert np.all(np.diff(residuals) <= 1e-7)

    def test_grid_reconstruction(self):
        blocks = build_blocks(1, 3)
        f = GridFunction.from_function(lambda x: np.exp(-2 * (x - 1) ** 2), -10.0, 10.0, 2001)
        error = f.with_values(f.values - reconstruct(blocks, f, 3).values)
        assert np.sqrt(error.integrate(error.values**2)) < 1e-3


class TestEigenCheck:
    def test_ground_state(self):
        assert eigen_check((0,), _lattice(-6.0, 6.0, 1201)) < 1e-4

    def test_two_dimensional(self):
        assert eigen_check((1, 1), _lattice((-6.0, -6.0), (6.0, 6.0), (601, 601))) < 1e-3

    def test_second_order(self):
        coarse = eigen_check((0,), _lattice(-6.0, 6.0, 601))
        fine = eigen_check((0,), _lattice(-6.0, 6.0, 1201))
        assert 3.5 <= coarse / fine <= 4.5


class TestKernelBound:
    blocks = build_blocks(1, 5)

    @pytest.mark.parametrize("alpha", [0, 1])
    @pytest.mark.parametrize("k", [0, 2, 4])
    def test_level_uniform(self, alpha, k):
        ratios = kernel_bound_ratio(self.blocks, alpha, k, levels=range(1, 6))
        assert abs(ratio_trend(ratios)) <= 0.1

    def test_plain_ratios_within_factor_three(self):
        ratios = kernel_bound_ratio(self.blocks, 0, 0, levels=range(0, 5))
        assert ratios.max() <= 3 * ratios.min()

    def test_larger_k(self):
        low = kernel_bound_ratio(self.blocks, 0, 2, levels=range(1, 6))
        high = kernel_bound_ratio(self.blocks, 0, 8, levels=range(1, 6))
        assert np.all(high >= low)
        assert abs(ratio_trend(high)) <= 0.15


class TestRegularize:
    def test_point_mass_peak(self):
        mu = SimpleNamespace(positions=np.zeros((1, 1)), weights=np.ones(1))
        delta = 0.1
        density = regularize(mu, delta, -2.0, 2.0, 401)
        assert density.values[200] == pytest.approx((2 * np.pi * delta) ** -0.5, rel=1e-12)

    def test_mass_inside_plateau(self):
        positions = np.linspace(-0.9, 0.9, 7).reshape(-1, 1)
        mu = SimpleNamespace(positions=positions, weights=np.full(7, 1 / 7))
        density = regularize(mu, 1e-2, -3.0, 3.0, 1201)
        assert density.integrate() == pytest.approx(1.0, abs=1e-3)

    def test_gaussian_samples(self):
        samples = rng_stream(9, "regularize").standard_normal(40_000)
        mu = SimpleNamespace(positions=samples.reshape(-1, 1), weights=np.full(samples.size, 1 / samples.size))
        density = regularize(mu, 0.05, -6.0, 6.0, 601)
        truth = stats.norm.pdf(density.axes[0])
        assert density.integrate(np.abs(density.values - truth)) < 0.05
