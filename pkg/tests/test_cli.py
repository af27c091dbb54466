"""Smoke tests for the command-line interface."""

import json

import numpy as np
import pytest

from svcubature.cli import EXIT_CONFIG, EXIT_OK, main
from svcubature.measures import load_measure


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCubatureBuild:
    def test_multi_1d_order5_atoms(self, capsys):
        code, out, _ = run(
            capsys, "cubature", "build", "--model", "1d", "--order", "5",
            "--multi", "--delta", "0.1",
        )
        assert code == EXIT_OK
        assert "1/6" in out or "0.1666" in out

    def test_build_writes_measure(self, capsys, tmp_path):
        out_path = tmp_path / "m.json"
        code, _, _ = run(
            capsys, "cubature", "build", "--model", "1d", "--order", "3",
            "--multi", "--delta", "0.5", "-o", str(out_path),
        )
        assert code == EXIT_OK
        m = load_measure(out_path)
        assert m.horizon == 0.5

    def test_verify_roundtrip(self, capsys, tmp_path):
        out_path = tmp_path / "m.json"
        run(
            capsys, "cubature", "build", "--model", "1d", "--order", "3",
            "--multi", "--delta", "0.5", "-o", str(out_path),
        )
        code, out, _ = run(
            capsys, "cubature", "verify", "--measure", str(out_path),
            "--model", "1d", "--order", "3", "--multi",
            "--delta", "0.5", "--horizon", "0.5",
        )
        assert code == EXIT_OK
        assert "relative_residual" in out

    def test_missing_measure_file(self, capsys):
        code, _, err = run(
            capsys, "cubature", "verify", "--measure", "/nonexistent/m.json"
        )
        assert code == EXIT_CONFIG
        assert "error:" in err


class TestPrice:
    def test_oracle_linear_model(self, capsys):
        code, out, _ = run(
            capsys, "price", "--method", "oracle", "--G", "cos",
            "--x0", "1", "--H", "1.5", "--T", "0.3",
        )
        assert code == EXIT_OK
        v = 0.3**3 / 3
        assert float(out.strip().splitlines()[-1].split(",")[2]) == pytest.approx(
            np.cos(1.0) * np.exp(-v / 2), abs=1e-7
        )

    def test_multi_period_price(self, capsys):
        code, out, _ = run(
            capsys, "price", "--method", "cub-multi", "--builtin", "1d-cos",
            "--G", "cos", "--x0", "1", "--H", "1.5", "--T", "0.3",
            "-M", "2", "-D", "30", "-N", "5",
        )
        assert code == EXIT_OK
        assert float(out.strip().splitlines()[-1].split(",")[2]) == pytest.approx(
            0.53995, abs=1e-3
        )

    def test_euler_price(self, capsys):
        code, out, _ = run(
            capsys, "price", "--method", "euler", "--builtin", "1d-cos",
            "--G", "cos", "--x0", "1", "--H", "1.5", "--T", "0.3",
            "-D", "20", "--samples", "200", "--seed", "1",
        )
        assert code == EXIT_OK
        float(out.strip().splitlines()[-1].split(",")[2])

    def test_unknown_payoff_is_config_error(self, capsys):
        code, _, err = run(
            capsys, "price", "--method", "oracle", "--G", "digital",
        )
        assert code == EXIT_CONFIG
        assert "error:" in err


class TestConfigFile:
    def test_config_fills_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"payoff": "square", "x0": 1.0, "horizon": 0.3}))
        code, out, _ = run(
            capsys, "price", "--method", "oracle", "--config", str(cfg),
        )
        assert code == EXIT_OK
        assert float(out.strip().splitlines()[-1].split(",")[2]) == pytest.approx(
            1.0 + 0.3**3 / 3, abs=1e-7
        )

    def test_bad_config_json(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{not json")
        code, _, err = run(capsys, "price", "--config", str(cfg))
        assert code == EXIT_CONFIG


class TestMoments:
    def test_dump(self, capsys):
        code, out, _ = run(capsys, "moments", "dump", "--model", "1d", "--order", "5")
        assert code == EXIT_OK
        assert len(out.strip().splitlines()) >= 10


class TestRepro:
    def test_table2_runs_and_writes_csv(self, capsys, tmp_path):
        out_path = tmp_path / "t2.csv"
        code, out, _ = run(capsys, "repro", "table2", "-o", str(out_path))
        assert code == EXIT_OK
        assert "PASS" in out
        assert out_path.exists()
