import contextlib
import io
import json
import os

import pytest

from cobord.cli import main

HERE = os.path.dirname(__file__)
ROOT = os.path.dirname(HERE)
GOLDEN = os.path.join(HERE, "golden")


def run_cli(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def golden(name):
    with open(os.path.join(GOLDEN, name), "r", encoding="utf-8") as fh:
        return fh.read()


class TestGenusCommand:
    def test_todd_values_golden(self):
        code, out = run_cli(["genus", "--phi", "todd", "--cpn", "6", "--json"])
        assert code == 0
        assert out == golden("genus_todd_cpn6.json")
        data = json.loads(out)
        assert all(v == "1" for v in data["values"].values())

    def test_csv(self):
        code, out = run_cli(["genus", "--phi", "a_hat", "--cpn", "2", "--format", "csv"])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "n,value"
        assert lines[2] == "2,-1/8"

    def test_config_echo(self):
        code, out = run_cli(["genus", "--phi", "l_genus", "--cpn", "4", "--json"])
        data = json.loads(out)
        assert data["config"]["phi"] == "l_genus"
        assert data["values"]["4"] == "1"
        assert data["values"]["3"] == "0"

    def test_unknown_phi_is_usage_error(self):
        code, _ = run_cli(["genus", "--phi", "nope", "--cpn", "2"])
        assert code == 2


class TestFglCommand:
    def test_validate_named(self):
        code, out = run_cli(
            ["fgl", "validate", "--input", "multiplicative-u", "--order", "5", "--json"]
        )
        assert code == 0
        assert json.loads(out)["valid"] is True

    def test_log_golden(self):
        code, out = run_cli(
            ["fgl", "log", "--input", "multiplicative-q", "--order", "4", "--json"]
        )
        assert code == 0
        assert out == golden("fgl_log_multiplicative.json")

    def test_classify_golden(self):
        code, out = run_cli(
            ["fgl", "classify", "--input", "multiplicative-q", "--order", "5", "--json"]
        )
        assert code == 0
        assert out == golden("fgl_classify_mult_q.json")

    def test_classify_integral_base_errors(self):
        code, _ = run_cli(["fgl", "classify", "--input", "multiplicative-u"])
        assert code == 2

    def test_validate_file(self):
        path = os.path.join(ROOT, "demos", "multiplicative-u.json")
        code, out = run_cli(["fgl", "validate", "--input", path, "--json"])
        assert code == 0
        assert json.loads(out)["valid"] is True


class TestLandweberCommand:
    def test_verdicts_golden(self):
        code, out = run_cli(
            ["landweber", "--fgl", "multiplicative-u", "--primes", "2,3,5",
             "--stages", "2", "--json"]
        )
        assert code == 0
        assert out == golden("landweber_all.json")

    def test_additive_fails_exit_zero(self):
        # the verdict is delivered, so the exit code is 0
        code, out = run_cli(
            ["landweber", "--fgl", "additive", "--primes", "2", "--stages", "1", "--json"]
        )
        assert code == 0
        data = json.loads(out)
        assert data["verdicts"]["2"]["status"] == "fails-at-stage-1"


class TestTorCommand:
    def test_koszul_golden(self, monkeypatch):
        monkeypatch.chdir(ROOT)
        code, out = run_cli(
            ["tor1",
             "--module", "demos/koszul-module.json",
             "--map", "demos/augmentation-map.json",
             "--window=-6..0", "--json"]
        )
        assert code == 0
        assert out == golden("tor1_koszul.json")
        data = json.loads(out)
        assert data["tor1"]["-2"]["dim"] == 1

    def test_bad_window(self):
        code, _ = run_cli(
            ["tor1",
             "--module", os.path.join(ROOT, "demos", "koszul-module.json"),
             "--map", os.path.join(ROOT, "demos", "augmentation-map.json"),
             "--window", "oops"]
        )
        assert code == 2


class TestCwCommand:
    def test_axioms_small(self):
        code, out = run_cli(["cw", "axioms", "--n", "8", "--json"])
        assert code == 0
        data = json.loads(out)
        assert data["ok"] is True
        assert "hjhj_left_square" in data["results"]

    def test_deterministic_given_config(self):
        args = ["cw", "chern", "--n", "8", "--seed", "3", "--json"]
        _, first = run_cli(args)
        _, second = run_cli(args)
        assert first == second

    def test_csv_format(self):
        code, out = run_cli(["cw", "formcalc", "--n", "16", "--format", "csv"])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "identity,residual,tolerance,pass"
        assert all(line.endswith("True") for line in lines[1:])

    def test_toml_config(self):
        path = os.path.join(ROOT, "demos", "pushforward.toml")
        code, out = run_cli(
            ["cw", "pushforward", "--n", "8", "--config", path, "--json"]
        )
        # the config file overrides n back to 12
        assert code == 0
        data = json.loads(out)
        assert data["config"]["n"] == 12
        assert data["ok"] is True

    def test_failing_tolerance_exit_one(self):
        import tempfile

        with tempfile.NamedTemporaryFile("w", suffix=".toml", delete=False) as fh:
            fh.write('tolerance = 1e-30\n')
            path = fh.name
        try:
            code, out = run_cli(
                ["cw", "transgression", "--n", "8", "--config", path, "--json"]
            )
            assert code == 1
            assert json.loads(out)["ok"] is False
        finally:
            os.unlink(path)

    def test_usage_error(self):
        code, _ = run_cli(["cw", "mystery"])
        assert code == 2

    def test_cobord_threads_env_deterministic(self, monkeypatch):
        args = ["cw", "transgression", "--n", "8", "--json"]
        _, serial = run_cli(args)
        monkeypatch.setenv("COBORD_THREADS", "4")
        _, threaded = run_cli(args)
        assert serial == threaded
