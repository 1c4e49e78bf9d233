# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

import json

import numpy as np
import pytest
from scipy import stats

from hermite_balance.criterion.balance import (
    ParticleMeasure,
    build_dictionary,
    calibrate_dictionary,
    cross_validated_delta,
    dk_distance,
    example1_statistic,
    fourier_balance,
    gaussian_measure,
    hypothesis_Hq_statistic,
    hypothesis_Hq_tilde_statistic,
    intro_model_samples,
    oo_ratios,
    pi_functional,
    reciprocity_condition,
    theorem2C_verdict,
)
from hermite_balance.criterion.gridfn import GridFunction, rng_stream
from hermite_balance.criterion.hermite import build_blocks
from hermite_balance.criterion.young_orlicz import log_entropy, power
from hermite_balance.exceptions import CurveTooShort, DimensionMismatch

DICTIONARY = build_dictionary(1, 3)


def _normal_grid(variance, half_width=12.0, points=1201):
    sd = np.sqrt(variance)
    return GridFunction.from_function(lambda x: stats.norm.pdf(x, 0.0, sd), -half_width, half_width, points)


def _normal_measure(variance):
    """N(0, variance) on the same lattice as _normal_grid, with its density closure."""
    sd = np.sqrt(variance)
    return ParticleMeasure.from_grid(_normal_grid(variance), density=lambda x: stats.norm.pdf(np.ravel(x), 0.0, sd))


class TestParticleMeasure:
    def test_samples(self):
        mu = ParticleMeasure.from_samples(np.arange(4.0))
        assert mu.dim == 1 and mu.size == 4
        assert mu.total_mass == pytest.approx(1.0)
        assert mu.integrate(lambda x: x[:, 0]) == pytest.approx(1.5)

    def test_density_mass(self):
        mu = gaussian_measure(0.0, 1.0)
        assert mu.total_mass == pytest.approx(1.0, abs=1e-2)

    def test_signed_variation(self):
        mu = ParticleMeasure(np.array([[0.0], [1.0]]), np.array([1.0, -0.5]))
        assert mu.total_variation == pytest.approx(1.5)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            ParticleMeasure(np.array([[np.nan]]), np.ones(1))

    def test_localize(self):
        mu = ParticleMeasure.from_samples(np.array([-1.0, 1.0]))
        local = mu.localize(lambda x: (x[:, 0] > 0).astype(float))
        assert local.total_mass == pytest.approx(0.5)


class TestDictionary:
    def test_norms_positive(self):
        assert np.all(DICTIONARY.norms > 0)
        assert np.all(np.diff(DICTIONARY.norms, axis=0) >= 0)

    def test_calibration(self):
        defects = calibrate_dictionary(DICTIONARY)
        assert 0.0 <= defects["tv_defect"] < 1e-6
        assert 0.25 <= defects["shift_ratio"] <= 1.0

    def test_two_dimensional(self):
        dictionary = build_dictionary(2, 2)
        mu = ParticleMeasure.point_mass([0.0, 0.0])
        nu = ParticleMeasure.point_mass([0.5, 0.0])
        assert dk_distance(mu, nu, 1, dictionary).lower > 0
        with pytest.raises(DimensionMismatch):
            dk_distance(mu, ParticleMeasure.point_mass(0.0), 1, dictionary)


class TestDistance:
    def test_identity(self):
        mu = gaussian_measure(0.0, 1.0)
        estimate = dk_distance(mu, mu, 1, DICTIONARY)
        assert estimate.lower == 0.0
        assert estimate.upper == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("shift", [0.05, 0.1, 0.2])
    def test_gaussian_shift(self, shift):
        estimate = dk_distance(gaussian_measure(0.0, 1.0), gaussian_measure(shift, 1.0), 1, DICTIONARY)
        assert 0.25 * shift <= estimate.lower <= shift
        assert estimate.upper == pytest.approx(shift, rel=1e-6)
        assert estimate.side == "upper"

    def test_total_variation(self):
        estimate = dk_distance(ParticleMeasure.point_mass(0.0), ParticleMeasure.point_mass(1.0), 0, DICTIONARY)
        assert estimate.lower == pytest.approx(2.0, abs=1e-6)
        assert estimate.upper is None

    def test_pseudometric(self):
        a = gaussian_measure(0.0, 1.0)
        b = gaussian_measure(0.1, 1.0)
        c = gaussian_measure(-0.2, 1.5)
        for k in range(4):
            ab = dk_distance(a, b, k, DICTIONARY).lower
            assert ab == pytest.approx(dk_distance(b, a, k, DICTIONARY).lower, rel=1e-12)
            ac = dk_distance(a, c, k, DICTIONARY).lower
            bc = dk_distance(b, c, k, DICTIONARY).lower
            assert ac <= ab + bc + 1e-12

    def test_monotone_in_k(self):
        rng = rng_stream(4, "dk-monotone")
        mu = ParticleMeasure.from_samples(rng.standard_normal(500))
        nu = ParticleMeasure.from_samples(rng.standard_normal(500) + 0.3)
        values = [dk_distance(mu, nu, k, DICTIONARY).lower for k in range(4)]
        assert np.all(np.diff(values) <= 1e-15)


class TestPiFunctional:
    def test_constant_sequence(self):
        mu = ParticleMeasure.from_grid(_normal_grid(1.0))
        approximants = [_normal_grid(1.0)] * 5
        result = pi_functional(mu, approximants, 0, 1, 1, power(2), DICTIONARY, N=5)
        assert result.distance_sum == pytest.approx(0.0, abs=1e-9)
        assert result.converged
        assert np.isfinite(result.value)

    def test_improving_gaussians(self):
        mu = _normal_measure(1.0)
        approximants = [_normal_grid(1 + 4.0**-n) for n in range(8)]
        result = pi_functional(mu, approximants, 0, 1, 1, power(2), DICTIONARY, N=8)
        assert result.converged
        assert result.distance_side == "upper"
        upper = [level["dk_upper"] for level in result.levels]
        assert np.all(np.diff(upper) <= 0)

    def test_fixed_wrong_sequence_diverges(self):
        mu = gaussian_measure(0.0, 1.0)
        approximants = [_normal_grid(2.0)] * 8
        result = pi_functional(mu, approximants, 0, 1, 1, power(2), DICTIONARY, N=8)
        assert not result.converged
        terms = [level["distance_term"] for level in result.levels]
        assert terms[-1] / terms[-2] == pytest.approx(2 ** 1.5, rel=1e-6)


class TestHypothesisHq:
    R = np.logspace(2, 10, 17)

    def test_decaying_curve_is_regular(self):
        q, k, m, a = 0, 1, 1, 2.0
        s = (q + k) / (2 * m)
        dk = self.R**-s * np.log(self.R) ** (-(a * (1 + s) + 1) - 0.5)
        result = hypothesis_Hq_statistic(list(zip(self.R, dk)), q, k, m, log_entropy(), a)
        assert result.verdict == "regular"

    def test_slow_curve_is_inconclusive(self):
        q, k, m = 0, 1, 1
        dk = self.R ** (-0.8 * (q + k) / (2 * m))
        result = hypothesis_Hq_statistic(list(zip(self.R, dk)), q, k, m, log_entropy(), 2.0)
        assert result.verdict == "inconclusive"
        assert result.slope > 0.05

    def test_homogeneous(self):
        dk = self.R**-0.5
        one = hypothesis_Hq_statistic(list(zip(self.R, dk)), 0, 1, 1, power(2), 2.0)
        three = hypothesis_Hq_statistic(list(zip(self.R, 3 * dk)), 0, 1, 1, power(2), 2.0)
        assert np.allclose(three.statistic, 3 * one.statistic, rtol=1e-12)

    def test_short_curves(self):
        with pytest.raises(CurveTooShort):
            hypothesis_Hq_statistic([(10.0**j, 1.0) for j in range(2, 7)], 0, 1, 1, power(2), 2.0)
        with pytest.raises(CurveTooShort):
            hypothesis_Hq_statistic([(v, 1.0) for v in np.logspace(1, 3, 8)], 0, 1, 1, power(2), 2.0)

    def test_lp_form(self):
        q, k, m, p, a = 0, 1, 1, 2.0, 2.0
        exponent = (q + k + 1 / (p / (p - 1))) / (2 * m)
        dk = self.R**-exponent * np.log(self.R) ** (-a * (1 + exponent))
        result = example1_statistic(list(zip(self.R, dk)), q, k, m, p, a)
        assert np.allclose(result.statistic, 1.0)
        assert result.verdict == "regular"

    def test_tilde_form(self):
        dk = self.R**-2.0
        result = hypothesis_Hq_tilde_statistic(self.R, dk, 0, 1, 1, power(2), 2.0)
        assert result.verdict == "regular"
        assert json.dumps(result.as_dict())


class TestFourierBalance:
    xi = np.logspace(1, 4, 16)

    def test_exact_approximation(self):
        samples = {x: [(np.nan, 0.0, 0.8)] for x in self.xi}
        assert fourier_balance(samples, 2).exponent == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("h,k", [(1.0, 1), (0.5, 2), (1.0, 3)])
    def test_intro_model(self, h, k):
        result = fourier_balance(intro_model_samples(h, k, self.xi), k)
        assert result.exponent == pytest.approx(h * k / (1 + h + k), abs=0.05)

    def test_two_dimensional_failure(self):
        result = fourier_balance(intro_model_samples(1.0, 1, self.xi), 1, d=2)
        assert not result.conclusive

    def test_short_grid(self):
        with pytest.raises(ValueError):
            fourier_balance({1.0: [(0, 0.1, 1.0)], 10.0: [(0, 0.1, 1.0)]}, 1)


class TestVerdict:
    def test_gaussian_is_regular(self):
        mu = _normal_measure(1.0)
        approximants = [_normal_grid(1 + 4.0**-n) for n in range(6)]
        report = theorem2C_verdict(mu, approximants, {"q": 0, "k": 1, "m": 1, "e": power(2), "a": 2.0}, DICTIONARY)
        assert report.passed
        assert report.provenance["distance_side"] == "upper"
        payload = json.loads(json.dumps(report.as_dict()))
        assert payload["verdict"] == "regular"
        assert len(payload["levels"]) == 6

    def test_point_mass_is_inconclusive(self):
        mu = ParticleMeasure.point_mass(0.0)
        approximants = [_normal_grid(4.0**-n, half_width=6.0, points=2401) for n in range(6)]
        report = theorem2C_verdict(mu, approximants, {"q": 0, "k": 1, "m": 1, "e": power(2)}, DICTIONARY)
        assert report.verdict == "inconclusive"
        assert report.pi_tail == float("inf")

    def test_cross_validation_prefers_small_delta_for_many_samples(self):
        samples = rng_stream(8, "lscv").standard_normal(3000)
        delta, scores = cross_validated_delta(ParticleMeasure.from_samples(samples), [1.0, 0.3, 0.1, 0.03])
        assert delta < 1.0
        assert len(scores) == 4


class TestBlockInequalities:
    blocks = build_blocks(1, 4)
    f = GridFunction.from_function(lambda x: np.exp(-((x - 0.5) ** 2)), -10.0, 10.0, 1201)

    @pytest.mark.parametrize("alpha", [0, 1])
    def test_bounded(self, alpha):
        g = self.f.with_values(np.exp(-((self.f.axes[0] - 0.7) ** 2)))
        ratios = oo_ratios(self.blocks, self.f, power(2), alpha=alpha, m=1, g=g, k=1, dictionary=DICTIONARY)
        for key in ("oo3", "oo4", "oo5"):
            assert np.all(np.isfinite(ratios[key]))
            assert ratios[key].max() <= 25.0

    def test_two_dimensional_rejected(self):
        grid = GridFunction((-1.0, -1.0), (1.0, 1.0), np.ones((11, 11)))
        with pytest.raises(ValueError):
            oo_ratios(build_blocks(2, 1), grid, power(2))


class TestReciprocity:
    def test_power_in_one_dimension(self):
        result = reciprocity_condition(power(2), 0, 1, 1)
        assert result["holds"]
        assert result["alpha"] == pytest.approx(0.5, abs=1e-6)
        assert result["gap"] > 0

    def test_log_entropy(self):
        assert reciprocity_condition(log_entropy(), 1, 1, 2, d=2)["holds"]

    def test_needs_m_above_half_dimension(self):
        assert not reciprocity_condition(power(2), 0, 1, 1, d=2)["holds"]
