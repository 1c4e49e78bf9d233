# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

import itertools

import numpy as np
import pytest
from scipy import integrate, optimize

from hermite_balance.criterion.gridfn import rng_stream
from hermite_balance.criterion.interp import (
    ToyPair,
    b_condition,
    element_with_distance_curve,
    gamma_b_norm,
    k_functional,
    la_inequality,
    lemma_balance_witness,
    prop_balance_inclusion,
    prop_norm_equivalence,
    rho_norm,
    waterfill_distance,
)
from hermite_balance.criterion.young_orlicz import power
from hermite_balance.exceptions import Divergent

SYNTH_GRID = np.logspace(1, 40, 157)


def _random_pair(rng, N):
    return ToyPair(10 ** rng.uniform(0, 2, N)), rng.standard_normal(N)


def _geometric(N=40):
    i = np.arange(1, N + 1)
    return ToyPair(2.0**i), 2.0**-i


class TestKFunctional:
    def test_brute_force(self):
        rng = rng_stream(11, "k-brute")
        for N in (1, 2, 3):
            pair, y = _random_pair(rng, N)
            for t in 10 ** rng.uniform(-3, 1, 20):
                total = 0.0
                for yi, wi in zip(y, pair.weights):
                    x = np.linspace(-2 * abs(yi), 2 * abs(yi), 200_001)
                    total += np.min(np.abs(yi - x) + t * wi * np.abs(x))
                assert k_functional(pair, y, t) == pytest.approx(total, abs=1e-6)

    def test_limits(self):
        pair = ToyPair([2.0, 5.0, 10.0])
        y = np.array([1.0, -2.0, 0.5])
        assert k_functional(pair, y, 1.0) == pytest.approx(pair.norm_y(y))
        t = 1e-9
        assert k_functional(pair, y, t) / t == pytest.approx(pair.norm_x(y), rel=1e-12)

    def test_shape(self):
        rng = rng_stream(12, "k-shape")
        pair, y = _random_pair(rng, 6)
        t = np.logspace(-4, 1, 400)
        K = k_functional(pair, y, t)
        assert np.all(np.diff(K) >= -1e-15)
        assert np.all(K <= pair.norm_y(y) + 1e-12)
        assert np.all(np.diff(K / t) <= 1e-12)
        linear = np.linspace(1e-3, 1.0, 500)
        assert np.all(np.diff(k_functional(pair, y, linear), 2) <= 1e-12)

    def test_embedding(self):
        assert ToyPair([2.0, 4.0]).embedding_constant == 0.5
        with pytest.raises(ValueError):
            ToyPair([1.0, 0.0])


class TestGammaBNorm:
    def test_zero(self):
        assert gamma_b_norm(ToyPair([1.0, 3.0]), [0.0, 0.0], 0.5, 1.0) == 0.0

    def test_single_coordinate(self):
        assert gamma_b_norm(ToyPair([1.0]), [3.0], 0.5, 0.0) == pytest.approx(6.0, rel=1e-10)

    def test_against_quadrature(self):
        pair = ToyPair([2.0, 5.0, 30.0])
        y = np.array([0.7, -1.2, 0.4])
        gamma, b = 0.3, 1.0
        brute, _ = integrate.quad(
            lambda t: t ** (-gamma - 1) * abs(np.log(t)) ** b * k_functional(pair, y, t),
            0.0, 1.0, points=[1 / 30, 1 / 5, 1 / 2], limit=400,
        )
        assert gamma_b_norm(pair, y, gamma, b) == pytest.approx(brute, rel=1e-6)

    def test_homogeneous_and_subadditive(self):
        rng = rng_stream(13, "kb-norm")
        pair, y = _random_pair(rng, 5)
        z = rng.standard_normal(5)
        assert gamma_b_norm(pair, -3 * y, 0.4, 0.5) == pytest.approx(3 * gamma_b_norm(pair, y, 0.4, 0.5), rel=1e-9)
        assert gamma_b_norm(pair, y + z, 0.4, 0.5) <= gamma_b_norm(pair, y, 0.4, 0.5) + gamma_b_norm(pair, z, 0.4, 0.5) + 1e-9

    def test_divergent(self):
        with pytest.raises(Divergent):
            gamma_b_norm(ToyPair([1.0]), [1.0], 1.0, 0.0)


class TestRhoNorm:
    def test_zero(self):
        assert rho_norm(ToyPair([1.0, 2.0]), [0.0, 0.0], 1.0, 1, 0.0) == 0.0

    def test_outside_x_diverges(self):
        assert rho_norm(ToyPair([np.inf]), [1.0], 1.0, 1, 0.0) == float("inf")

    def test_enumeration(self):
        rng = rng_stream(14, "rho-enum")
        theta, m, a = 1.0, 1, 0.5
        for _ in range(10):
            pair, y = _random_pair(rng, 2)
            enumerated = 0.0
            for n in range(1, 21):
                best = np.inf
                for mask in itertools.product([0.0, 1.0], repeat=2):
                    x = np.array(mask) * y
                    cost = 2.0 ** (n * theta) * n**a * pair.norm_y(y - x) + 2.0 ** (-2 * n * m) * pair.norm_x(x)
                    best = min(best, cost)
                enumerated += best
            assert rho_norm(pair, y, theta, m, a) == pytest.approx(enumerated, rel=1e-6)

    def test_subadditive(self):
        rng = rng_stream(15, "rho-triangle")
        for _ in range(20):
            pair, y = _random_pair(rng, 4)
            z = rng.standard_normal(4)
            assert rho_norm(pair, y + z, 1.0, 1, 1.0) <= rho_norm(pair, y, 1.0, 1, 1.0) + rho_norm(pair, z, 1.0, 1, 1.0) + 1e-9


class TestNormEquivalence:
    def test_single_constant_across_scalings(self):
        rng = rng_stream(16, "prop-norm")
        pair = ToyPair(10 ** rng.uniform(0, 6, 5))
        samples = rng.standard_normal((100, 5))
        report = prop_norm_equivalence(pair, samples, 1.0, 1, 0.0)
        scaled = prop_norm_equivalence(pair, 10 * samples, 1.0, 1, 0.0)
        assert report.consistent
        assert np.isfinite(report.constant)
        assert scaled.constant == pytest.approx(report.constant, rel=1e-8)
        assert report.gamma == pytest.approx(1 / 3)

    def test_divergence_flagged_on_both_sides(self):
        pair = ToyPair([1.0, np.inf])
        report = prop_norm_equivalence(pair, [np.array([1.0, 1.0]), np.array([1.0, 0.0])], 1.0, 1, 0.0)
        assert report.consistent
        assert len(report.lower_ratios) == 1


class TestWaterfill:
    def test_against_linear_program(self):
        rng = rng_stream(17, "waterfill")
        for _ in range(10):
            pair, y = _random_pair(rng, 4)
            R = rng.uniform(0, pair.norm_x(y))
            N = pair.N
            # variables x, s (|y - x|), u (|x|); minimize sum s
            c = np.r_[np.zeros(N), np.ones(N), np.zeros(N)]
            eye, zero = np.eye(N), np.zeros((N, N))
            A = np.block([[-eye, -eye, zero], [eye, -eye, zero], [eye, zero, -eye], [-eye, zero, -eye]])
            A = np.vstack([A, np.r_[np.zeros(2 * N), pair.weights]])
            rhs = np.r_[-y, y, np.zeros(2 * N), R]
            bounds = [(None, None)] * N + [(0, None)] * 2 * N
            lp = optimize.linprog(c, A_ub=A, b_ub=rhs, bounds=bounds)
            assert waterfill_distance(pair, y, R) == pytest.approx(lp.fun, abs=1e-7)

    def test_element_of_x(self):
        pair, y = _geometric()
        assert waterfill_distance(pair, y, pair.norm_x(y)) == pytest.approx(0.0, abs=1e-15)

    def test_synthesized_curve(self):
        curve = lambda R: R**-0.5
        pair, y = element_with_distance_curve(curve, SYNTH_GRID)
        for R in SYNTH_GRID[::20]:
            assert waterfill_distance(pair, y, R) == pytest.approx(curve(R), rel=1e-8)


class TestBalanceInclusion:
    theta, m, a = 1.0, 1, 2.0
    alpha = theta / (2 * m)
    beta = 2 + a + theta / m

    def test_geometric_element(self):
        pair, y = _geometric()
        result = prop_balance_inclusion(pair, y, self.alpha, self.beta, self.theta, self.m, self.a)
        assert result.b_condition
        assert result.converged

    def test_synthesized_member(self):
        pair, y = element_with_distance_curve(lambda R: R**-self.alpha * np.log(R) ** (-self.beta - 0.5), SYNTH_GRID)
        result = prop_balance_inclusion(pair, y, self.alpha, self.beta, self.theta, self.m, self.a)
        assert result.b_condition
        assert result.converged
        assert np.isfinite(result.tail)

    def test_logarithmic_excess_fails_b_condition(self):
        pair, y = element_with_distance_curve(lambda R: R**-self.alpha * np.log(R) ** (-self.beta + 0.5), SYNTH_GRID)
        holds, statistic = b_condition(pair, y, self.alpha, self.beta)
        assert not holds
        assert statistic[-1] > statistic[len(statistic) // 2]

    def test_slow_curve_diverges(self):
        pair, y = element_with_distance_curve(lambda R: R ** (-0.8 * self.alpha), SYNTH_GRID)
        result = prop_balance_inclusion(pair, y, self.alpha, self.beta, self.theta, self.m, self.a)
        assert not result.b_condition
        assert not result.converged

    def test_orlicz_witness(self):
        pair, y = _geometric()
        result = lemma_balance_witness(pair, y, self.theta, self.m, self.a, power(2))
        assert result.converged

    def test_la_inequality(self):
        assert all(la_inequality(1, 2.0)[19:])
        assert all(la_inequality(2, 1.0, d=2)[9:])
