# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

import csv
import json

import pytest

from hermite_balance.commands import main


def _config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload, indent=2), encoding="utf-8")
    return str(path)


SMALL_ORLICZ = {"kind": "orlicz-check", "seed": 4, "params": {"cases": 5, "holder_cases": 6}}


class TestList:
    def test_text(self, capsys):
        assert main(["list"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 9
        assert lines[0].startswith("balance-verdict")

    def test_json(self, capsys):
        assert main(["list", "--json"]) == 0
        kinds = [entry["kind"] for entry in json.loads(capsys.readouterr().out)]
        assert len(kinds) == 9
        assert "sde-hormander" in kinds and "heat" in kinds


class TestDescribe:
    def test_elliptic_schema(self, capsys):
        assert main(["describe", "sde-elliptic", "--json"]) == 0
        schema = json.loads(capsys.readouterr().out)
        assert {"q", "k", "m", "h", "r", "y0", "delta_grid"} <= set(schema["params"])
        assert schema["params"]["q"] == {"type": "int", "default": 0}

    def test_text(self, capsys):
        assert main(["describe", "heat"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("heat: ")
        assert "eps_grid" in out

    def test_unknown(self, capsys):
        assert main(["describe", "wave"]) == 1
        assert "unknown kind" in capsys.readouterr().err


class TestRun:
    def test_artifacts(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", _config(tmp_path, SMALL_ORLICZ), "--out", str(out)]) == 0
        assert "orlicz-check: pass" in capsys.readouterr().out

        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["seed"] == 4
        assert manifest["config"]["params"]["cases"] == 5
        assert {"hermite_balance", "numpy", "scipy", "python"} <= set(manifest["versions"])
        assert manifest["wall_time"] >= 0
        assert "beta_ratio.csv" in manifest["artifacts"]

        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["outcome"] == "pass"
        assert "wall_time" not in report

        raw = (out / "beta_ratio.csv").read_bytes()
        assert raw.startswith(b"x,y,y_err\n")
        assert b"\r" not in raw
        with open(out / "beta_ratio.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 10
        assert float(rows[0]["y_err"]) == 0.0

    def test_seed_override(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", _config(tmp_path, SMALL_ORLICZ), "--out", str(out), "--seed", "11"]) == 0
        assert json.loads((out / "report.json").read_text(encoding="utf-8"))["seed"] == 11

    def test_report_independent_of_workers(self, tmp_path):
        path = _config(tmp_path, SMALL_ORLICZ)
        assert main(["run", path, "--out", str(tmp_path / "a"), "--workers", "1"]) == 0
        assert main(["run", path, "--out", str(tmp_path / "b"), "--workers", "2"]) == 0
        assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()

    def test_malformed_config(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["run", _config(tmp_path, '{"kind": "heat",'), "--out", str(out)]) == 1
        assert "line 1" in capsys.readouterr().err
        assert not out.exists()

    def test_unknown_field_is_line_anchored(self, tmp_path, capsys):
        out = tmp_path / "out"
        path = _config(tmp_path, '{\n  "kind": "heat",\n  "params": {\n    "nxx": 3\n  }\n}')
        assert main(["run", path, "--out", str(out)]) == 1
        assert "line 4: unknown parameter 'nxx'" in capsys.readouterr().err
        assert not out.exists()

    def test_cap_violation(self, tmp_path):
        out = tmp_path / "out"
        config = {"kind": "ibp-density", "caps": {"max_paths": 10}, "params": {"n_particles": 100}}
        assert main(["run", _config(tmp_path, config), "--out", str(out)]) == 1
        assert not out.exists()

    def test_missing_file(self, tmp_path):
        assert main(["run", str(tmp_path / "absent.json")]) == 1

    def test_runner_failure(self, tmp_path, capsys):
        out = tmp_path / "out"
        config = {"kind": "orlicz-check", "params": {"t_range": [1.0, 2.0]}}
        assert main(["run", _config(tmp_path, config), "--out", str(out)]) == 1
        assert "orlicz-check" in capsys.readouterr().err
        assert not out.exists()

    def test_inconclusive_exit(self, tmp_path):
        out = tmp_path / "out"
        config = {"kind": "balance-verdict", "params": {"model": "point_mass"}}
        assert main(["run", _config(tmp_path, config), "--out", str(out)]) == 2
        assert json.loads((out / "report.json").read_text(encoding="utf-8"))["outcome"] == "inconclusive"

    @pytest.mark.slow
    def test_hermite_default(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", _config(tmp_path, {"kind": "hermite-verify"}), "--out", str(out)]) == 0
        with open(out / "orthonormality.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert [float(row["x"]) for row in rows][-1] == 64.0
        assert max(float(row["y"]) for row in rows) < 1e-8

    @pytest.mark.slow
    def test_elliptic_higher_order(self, tmp_path):
        config = {"kind": "sde-elliptic", "seed": 22, "params": {"q": 1, "lemma10": False}}
        assert main(["run", _config(tmp_path, config), "--out", str(tmp_path / "out")]) == 2
