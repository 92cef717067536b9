"""End-to-end tests for the ``py-hardy`` command line."""

import json
from textwrap import dedent

import pytest

from pyhardy.cli import EXIT_INPUT, EXIT_NOT_MET, EXIT_OK, main

RAMP_FILE = """
[[function]]
name = "ramp"
u = "r*exp(-r)"
"""


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


@pytest.fixture
def ramp_file(tmp_path):
    path = tmp_path / "functions.toml"
    path.write_text(dedent(RAMP_FILE), encoding="utf-8")
    return path


class TestAnalyze:
    def test_preset(self, capsys):
        code, doc = run(capsys, "analyze", "--preset", "classical")
        assert code == EXIT_OK
        assert doc["command"] == "analyze"
        assert doc["exit_code"] == 0
        assert doc["certificate"]["verdict"] == "B1"
        assert doc["certificate"]["C"] == pytest.approx(4 / 9, rel=1e-9)
        assert doc["input"]["preset"] == "classical"
        assert "timing" not in doc

    def test_inline_triple(self, capsys):
        code, doc = run(
            capsys, "analyze", "--M", "power:p=2", "--phi=-r^2/2", "--omega", "r"
        )
        assert code == EXIT_OK
        assert doc["certificate"]["C"] == pytest.approx(4.0, rel=1e-9)
        assert doc["input"]["triple"]["omega"] == "r"

    def test_triple_file(self, capsys, tmp_path):
        path = tmp_path / "triple.toml"
        path.write_text('preset = "classical:p=2,alpha=0.5"\n', encoding="utf-8")
        code, doc = run(capsys, "analyze", "--triple", str(path))
        assert code == EXIT_OK
        assert doc["certificate"]["verdict"] == "B2"
        assert doc["certificate"]["active_class"] == "R-"

    def test_neither_is_not_met(self, capsys):
        code, doc = run(capsys, "analyze", "--preset", "classical:p=2,alpha=1")
        assert code == EXIT_NOT_MET
        assert doc["certificate"]["verdict"] == "neither"
        assert doc["certificate"]["C"] is None

    def test_bad_expression(self, capsys):
        code, doc = run(
            capsys, "analyze", "--M", "power:p=2", "--phi=-4*log(r)", "--omega", "1/r"
        )
        assert code == EXIT_INPUT
        assert "unknown identifier 'log'" in doc["diagnostics"][0]

    def test_partial_inline_triple(self, capsys):
        code, doc = run(capsys, "analyze", "--M", "power:p=2", "--phi=-4*ln(r)")
        assert code == EXIT_INPUT
        assert "--omega" in doc["diagnostics"][0]

    def test_no_triple(self, capsys):
        code, doc = run(capsys, "analyze")
        assert code == EXIT_INPUT
        assert "a triple is required" in doc["diagnostics"][0]

    def test_unknown_preset(self, capsys):
        code, doc = run(capsys, "analyze", "--preset", "clasical")
        assert code == EXIT_INPUT
        assert doc["diagnostics"][0].startswith("KeyError: Unknown catalog entry")
        assert "Close matches: classical" in doc["diagnostics"][0]

    def test_timing_and_out(self, capsys, tmp_path):
        out = tmp_path / "reports" / "analyze.json"
        code = main(["analyze", "--preset", "classical", "--timing", "--out", str(out)])
        assert code == EXIT_OK
        assert capsys.readouterr().out == ""
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert "certify" in doc["timing"]

    def test_config_override(self, capsys, tmp_path):
        config = tmp_path / "ledger.toml"
        config.write_text("[verify]\nrel_tol = 1e-4\n", encoding="utf-8")
        code, doc = run(capsys, "analyze", "--preset", "classical", "--config", str(config))
        assert code == EXIT_OK
        assert doc["ledger"]["verify.rel_tol"] == 1e-4
        assert doc["input"]["config_file"] == str(config)

    def test_config_unknown_key(self, capsys, tmp_path):
        config = tmp_path / "ledger.toml"
        config.write_text("[verify]\nreltol = 1e-4\n", encoding="utf-8")
        code, doc = run(capsys, "analyze", "--preset", "classical", "--config", str(config))
        assert code == EXIT_INPUT
        assert "Unknown config key 'verify.reltol'" in doc["diagnostics"][0]

    def test_traces(self, capsys, tmp_path):
        code, doc = run(capsys, "analyze", "--preset", "classical", "--traces", str(tmp_path))
        assert code == EXIT_OK
        assert {p.name for p in tmp_path.iterdir()} == {"b1.csv", "b2.csv", "K.csv", "L.csv"}
        assert len(doc["input"]["traces"]) == 4


class TestVerify:
    def test_functions_file(self, capsys, ramp_file):
        code, doc = run(capsys, "verify", "--preset", "classical", "--functions", str(ramp_file))
        assert code == EXIT_OK
        (row,) = doc["verifications"]
        assert row["function"] == "ramp"
        assert row["holds"] == "yes"
        assert row["ratio"] == pytest.approx(2 / 7, rel=1e-8)

    def test_norm(self, capsys, ramp_file):
        code, doc = run(
            capsys, "verify", "--preset", "classical", "--functions", str(ramp_file), "--norm"
        )
        assert code == EXIT_OK
        assert doc["norm_verifications"][0]["C_tilde"] == pytest.approx(13 / 9)

    def test_constant_override_fails(self, capsys, ramp_file):
        code, doc = run(
            capsys,
            "verify",
            "--preset",
            "classical",
            "--functions",
            str(ramp_file),
            "--constant",
            "0.1",
        )
        assert code == EXIT_NOT_MET
        assert doc["verifications"][0]["holds"] == "no"
        assert doc["diagnostics"] == ["holds=no for ramp"]
        assert "constant supplied with --constant" in doc["certificate"]["notes"]

    def test_constant_on_neither_needs_class(self, capsys, ramp_file):
        argv = ["verify", "--preset", "classical:p=2,alpha=1", "--functions", str(ramp_file)]
        code, doc = run(capsys, *argv, "--constant", "1")
        assert code == EXIT_INPUT
        assert "--active-class" in doc["diagnostics"][0]

    def test_stock_in_order(self, capsys):
        code, doc = run(capsys, "verify", "--preset", "classical", "--stock", "--jobs", "2")
        assert code == EXIT_OK
        names = [row["function"] for row in doc["verifications"]]
        assert len(names) == 12
        assert names[0] == "trapezoid"
        assert names[-1] == "extremal_one"

    def test_laplace_divergence_is_not_a_failure(self, capsys, tmp_path):
        path = tmp_path / "functions.toml"
        path.write_text('[[function]]\nbuiltin = "laplace"\n', encoding="utf-8")
        code, doc = run(
            capsys, "verify", "--preset", "gaussian_counterexample", "--functions", str(path)
        )
        assert code == EXIT_OK
        assert doc["verifications"][0]["holds"] == "violated_divergence"

    def test_empty_functions_file(self, capsys, tmp_path):
        path = tmp_path / "functions.toml"
        path.write_text('title = "empty"\n', encoding="utf-8")
        code, doc = run(capsys, "verify", "--preset", "classical", "--functions", str(path))
        assert code == EXIT_INPUT
        assert "no [[function]] entries" in doc["diagnostics"][0]

    def test_bad_function_expression(self, capsys, tmp_path):
        path = tmp_path / "functions.toml"
        path.write_text('[[function]]\nu = "sin(r)"\n', encoding="utf-8")
        code, doc = run(capsys, "verify", "--preset", "classical", "--functions", str(path))
        assert code == EXIT_INPUT
        assert "sin" in doc["diagnostics"][0]

    def test_missing_functions(self, capsys):
        code, doc = run(capsys, "verify", "--preset", "classical")
        assert code == EXIT_INPUT
        assert "test functions are required" in doc["diagnostics"][0]


class TestOtherCommands:
    def test_classify_single_function(self, capsys):
        code, doc = run(capsys, "classify", "--preset", "classical", "--u", "r")
        assert code == EXIT_OK
        (row,) = doc["memberships"]
        assert row["direct"]["in_Rminus"] == "yes"
        assert row["direct"]["in_Rplus"] == "no"
        assert len(row["direct"]["theta_trace"]) == 41

    def test_bk_violated(self, capsys):
        code, doc = run(capsys, "bk", "--preset", "gaussian_counterexample")
        assert code == EXIT_NOT_MET
        assert doc["bk"]["status"] == "violated_G_infinite"
        assert doc["bk"]["B_reading"] == "single global B"

    def test_bk_satisfied(self, capsys):
        code, doc = run(capsys, "bk", "--preset", "classical:p=2,alpha=-2")
        assert code == EXIT_OK
        assert doc["bk"]["status"] == "satisfied"

    def test_muckenhoupt(self, capsys):
        code, doc = run(capsys, "muckenhoupt", "--preset", "classical:p=2,alpha=-2")
        assert code == EXIT_OK
        assert doc["muckenhoupt"]["B"] == pytest.approx(1 / 9, rel=1e-6)
        assert doc["input"]["p"] == 2.0

    def test_muckenhoupt_infinite(self, capsys):
        code, doc = run(capsys, "muckenhoupt", "--preset", "classical")
        assert code == EXIT_NOT_MET
        assert doc["muckenhoupt"]["B"] == "inf"

    def test_sharpness(self, capsys):
        code, doc = run(capsys, "sharpness", "--preset", "classical", "--budget", "200")
        assert code == EXIT_OK
        result = doc["sharpness"]
        assert result["best_ratio"] >= 0.4
        assert result["fraction_of_C"] >= 0.9
        assert result["fraction_of_C"] == pytest.approx(result["best_ratio"] * 9 / 4)
        assert doc["input"]["family"]["name"] == "classical.above"

    def test_sharpness_counterexample(self, capsys):
        code, doc = run(
            capsys, "sharpness", "--preset", "classical", "--budget", "50", "--constant", "0.1"
        )
        assert code == EXIT_NOT_MET
        assert doc["counterexample"]["ratio"] > 0.1

    def test_sharpness_without_family(self, capsys):
        code, doc = run(
            capsys, "sharpness", "--M", "power:p=2", "--phi=-4*ln(r)", "--omega", "1/r"
        )
        assert code == EXIT_INPUT


class TestCatalogCommand:
    def test_list(self, capsys):
        assert main(["catalog", "list"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines == [
            "classical:p=2,alpha=4",
            "omega_phi_prime:p=2,alpha=4",
            "log_weights:alpha=1,beta=1,p=1.5",
            "gaussian_counterexample:p=2",
        ]

    def test_show(self, capsys):
        assert main(["catalog", "show", "gaussian_counterexample"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("gaussian_counterexample:p=2  phi = -r^2/2, omega = r")
        assert "excluded: laplace" in out
        assert "bk_status = 'violated_G_infinite' [qualitative]" in out

    def test_show_needs_name(self, capsys):
        assert main(["catalog", "show"]) == EXIT_INPUT
        assert "catalog show needs a NAME" in capsys.readouterr().err

    def test_show_unknown(self, capsys):
        assert main(["catalog", "show", "gausian"]) == EXIT_INPUT
        assert "error: Unknown catalog entry 'gausian'" in capsys.readouterr().err
