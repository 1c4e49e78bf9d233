# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

import importlib
import json
import logging

import numpy as np
import pytest

from hermite_balance import hooks
from hermite_balance.api import experiments
from hermite_balance.config import parse_config
from hermite_balance.criterion.balance import BalanceReport
from hermite_balance.criterion.gridfn import fit_rate
from hermite_balance.criterion.sde_lab import Lemma10Result


def _params(kind, **overrides):
    return parse_config(json.dumps({"kind": kind, "params": overrides})).params


def _data(result):
    assert result["success"], result.get("message")
    json.dumps(result["data"], allow_nan=False)
    return result["data"]


class TestRegistry:
    def test_nine_kinds(self):
        assert len(hooks.experiment_kinds) == 9

    @pytest.mark.parametrize("kind", sorted(hooks.experiment_kinds))
    def test_runner_resolves(self, kind):
        module, _, name = hooks.experiment_kinds[kind]["runner"].rpartition(".")
        assert callable(getattr(importlib.import_module(module), name))

    @pytest.mark.parametrize("kind", sorted(hooks.experiment_kinds))
    def test_defaults_validate(self, kind):
        schema = hooks.experiment_kinds[kind]["params"]
        defaults = {name: default for name, (_, default) in schema.items()}
        assert parse_config(json.dumps({"kind": kind, "params": defaults})).params == _params(kind)

    def test_elliptic_schema(self):
        assert {"q", "k", "m", "h", "r", "y0", "delta_grid"} <= set(hooks.experiment_kinds["sde-elliptic"]["params"])


class TestEnvelope:
    def test_failure_is_logged(self, caplog):
        with caplog.at_level(logging.ERROR, logger="hermite_balance.api.experiments"):
            result = experiments.orlicz_check(_params("orlicz-check", t_range=[1.0, 2.0]))
        assert result == {"success": False, "message": result["message"]}
        assert "t_range" in result["message"]
        assert "Orlicz Check Error" in caplog.text

    def test_unknown_heat_model(self):
        result = experiments.heat(_params("heat", model="wave"))
        assert not result["success"]

    def test_unknown_balance_model(self):
        assert not experiments.balance_verdict(_params("balance-verdict", model="cauchy"))["success"]


class TestRunners:
    def test_orlicz_check(self):
        data = _data(experiments.orlicz_check(_params("orlicz-check"), seed=3))
        assert data["outcome"] == "pass"
        assert set(data["curves"]) == {"beta_ratio", "beta_corrected"}
        curve = data["curves"]["beta_ratio"]
        assert len(curve["x"]) == len(curve["y"]) == len(curve["y_err"]) == 10

    def test_orlicz_reports_both_beta_ratios(self):
        beta = _data(experiments.orlicz_check(_params("orlicz-check", cases=2, holder_cases=3)))["report"]["beta_log_entropy"]
        assert beta["gated_on"] == "beta / (ln t - ln ln t)"
        assert beta["corrected_ratio"]["within_band"]
        assert beta["plain_ratio"]["min"] < beta["corrected_ratio"]["min"]
        assert set(beta["plain_ratio"]) == {"min", "max", "within_band"}

    def test_hermite_core_checks(self):
        data = _data(experiments.hermite_verify(_params("hermite-verify", levels=2, reconstruction_levels=3)))
        checks = data["report"]["checks"]
        assert checks["orthonormality"] and checks["partition_of_unity"] and checks["eigen_second_order"]
        assert data["curves"]["orthonormality"]["x"] == [4.0, 8.0, 16.0, 32.0, 64.0]

    @pytest.mark.slow
    def test_hermite_defaults_pass(self):
        assert _data(experiments.hermite_verify(_params("hermite-verify")))["outcome"] == "pass"

    def test_mollify_rates(self):
        data = _data(experiments.mollify_rates(_params("mollify-rates")))
        assert data["outcome"] == "pass"
        assert {"kk2_q1_k1", "kk3_n3_q1", "kk2_q0_k2", "kk3_n2_q0"} <= set(data["curves"])

    def test_mollify_ante_rec_parameters(self, monkeypatch):
        calls = []
        original = experiments.ante_rec_product

        def recording(f, kern, r, n, k, l, *rest):
            calls.append((r, n, k, l))
            return original(f, kern, r, n, k, l, *rest)

        monkeypatch.setattr(experiments, "ante_rec_product", recording)
        data = _data(experiments.mollify_rates(_params("mollify-rates", grid=801)))
        assert calls == [(2, 3, 1, 2), (1, 2, 2, 2)]
        assert all(case["ante_rec"]["growth"] <= experiments.ANTE_REC_GROWTH for case in data["report"]["cases"])

    def test_mollify_explicit_m(self):
        data = _data(experiments.mollify_rates(_params("mollify-rates", cases=[[0, 1, 2, 2]], grid=801)))
        (case,) = data["report"]["cases"]
        assert case["m"] == 2
        assert (case["ante_rec"]["r"], case["ante_rec"]["n"], case["ante_rec"]["l"]) == (1, 4, 4)

    def test_mollify_rejects_degenerate_case(self):
        assert not experiments.mollify_rates(_params("mollify-rates", cases=[[1, 1, 1]]))["success"]

    def test_balance_gaussian(self):
        data = _data(experiments.balance_verdict(_params("balance-verdict")))
        assert data["outcome"] == "regular"
        fourier = data["report"]["fourier"]
        assert fourier["d=1"]["exponent"] == pytest.approx(fourier["expected_exponent"], abs=0.05)
        assert not fourier["d=2"]["conclusive"]
        assert data["report"]["reciprocity"]["holds"]

    def test_balance_point_mass(self):
        data = _data(experiments.balance_verdict(_params("balance-verdict", model="point_mass")))
        assert data["outcome"] == "inconclusive"

    def test_interp_props(self):
        data = _data(experiments.interp_props(_params("interp-props"), seed=16))
        assert data["outcome"] == "pass"
        assert len(data["report"]["witnesses"]) == 10
        assert data["report"]["level_inequality_from"] <= 20

    def test_ibp_density_layout(self):
        data = _data(experiments.ibp_density(_params("ibp-density", n_particles=200_000, points=[[0.0, 0.0]], mixture=False)))
        (row,) = data["report"]["estimates"]
        assert row["exact"] == pytest.approx(1 / (2 * 3.141592653589793))
        assert data["curves"]["density"]["y_err"][0] > 0
        assert "weights_identity" in data["report"]["checks"]
        assert set(data["report"]["weights_identity_z"]) == {"gaussian"}

    def test_ibp_density_rejects_other_dimensions(self):
        assert not experiments.ibp_density(_params("ibp-density", n_particles=1000, points=[[0.0]]))["success"]

    @pytest.mark.slow
    def test_ibp_density_defaults(self):
        assert _data(experiments.ibp_density(_params("ibp-density"), seed=10))["outcome"] == "pass"

    def test_elliptic_dimension_mismatch(self):
        result = experiments.sde_elliptic(_params("sde-elliptic", d=2, y0=[0.0, 0.0, 0.0]))
        assert not result["success"]

    def _stub_elliptic(self, monkeypatch, rate_exponent, log_power):
        regular = BalanceReport({"q": 0}, [], float("nan"), float("nan"), 0.1, -0.5, "regular", {})
        monkeypatch.setattr(experiments, "theorem9_pipeline", lambda *args, **kwargs: regular)
        deltas = np.array([0.2, 0.1, 0.05, 0.025, 0.0125])
        upper = deltas**rate_exponent * np.log(1 / deltas) ** log_power
        rate = Lemma10Result(deltas, upper / 2, upper, np.zeros_like(deltas), fit_rate(deltas, upper))
        monkeypatch.setattr(experiments, "lemma10_rate", lambda *args, **kwargs: rate)
        return _data(experiments.sde_elliptic(_params("sde-elliptic", h=1.0)))

    def test_elliptic_lemma10_checks_recorded(self, monkeypatch):
        data = self._stub_elliptic(monkeypatch, 0.5, -3.0)
        assert data["report"]["lemma10"]["checks"] == {"delta_exponent": True, "log_exponent": True}
        assert data["outcome"] == "regular"

    def test_elliptic_lemma10_failure_withdraws_verdict(self, monkeypatch):
        data = self._stub_elliptic(monkeypatch, 0.1, 0.0)
        assert not data["report"]["lemma10"]["checks"]["delta_exponent"]
        assert data["outcome"] == "inconclusive"

    @pytest.mark.slow
    def test_elliptic_higher_order_inconclusive(self):
        data = _data(experiments.sde_elliptic(_params("sde-elliptic", q=1, lemma10=False), seed=22))
        assert data["outcome"] == "inconclusive"

    @pytest.mark.slow
    def test_heat_additive(self):
        params = _params("heat", model="additive", n_real=2000, nx=32, moments=True)
        data = _data(experiments.heat(params, seed=15))
        assert data["outcome"] == "regular"
        table = data["tables"]["moments"]
        assert table["columns"][0] == "eps"
        assert len(table["rows"]) == len(params["eps_grid"])
