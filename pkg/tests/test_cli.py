import json
import subprocess
import sys

import jsonschema
import pytest

from mcflow.cli import main, run
from mcflow.systems import system_source


@pytest.fixture(scope="module")
def schema():
    from importlib import resources

    return json.loads(
        resources.files("mcflow.data").joinpath("report.schema.json").read_text()
    )


def run_json(argv):
    document, status, diagnostic = run(argv)
    assert diagnostic is None, diagnostic
    return document, status


class TestVerify:
    def test_guillot_exits_clean(self, schema):
        document, status = run_json(["verify", "guillot"])
        assert status == 0
        assert document["exit_status"] == 0
        assert document["sections"]["multiplier"]["M"] == "1/(2*y^3*z)"
        jsonschema.validate(document, schema)
        failing = [c for c in document["sections"]["checks"] if c["status"] == "fails"]
        assert failing == []

    def test_guillot_oracle_rows_cover_checks(self):
        document, _ = run_json(["verify", "guillot", "--points", "5"])
        samples = document["sections"]["numeric"]["samples"]
        assert samples, "oracle section must not be empty"
        assert all(row["verdict"] == "pass" for row in samples)
        assert all(row["agrees_with_symbolic"] for row in samples)

    def test_dh_symmetric_concordance_flags_gamma_dx(self, schema):
        document, status = run_json(["verify", "dh_symmetric"])
        assert status == 0
        jsonschema.validate(document, schema)
        mismatches = [
            (row["form"], row["component"])
            for row in document["sections"]["concordance"]
            if row["status"] == "mismatch"
        ]
        assert mismatches == [("gamma", "dx")]

    def test_dh_classic_runs_reduction(self):
        document, status = run_json(["verify", "dh_classic"])
        assert status == 0
        names = [c["check"] for c in document["sections"]["checks"]]
        assert "reduction.xdot" in names

    def test_heisenberg(self):
        document, status = run_json(["verify", "heisenberg_example"])
        assert status == 0
        names = {c["check"] for c in document["sections"]["checks"]}
        assert "heisenberg.domega2" in names

    def test_sigma_candidate_failure_is_exit_1(self):
        # rho = 1, f = 0 leaves the non-integrable potential untouched
        document, status = run_json(["verify", "guillot", "--rho", "1", "--f", "0"])
        assert status == 1
        sigma = next(
            c for c in document["sections"]["checks"] if c["check"] == "sigma.integrability"
        )
        assert sigma["status"] == "fails"
        agreement = next(
            c for c in document["sections"]["checks"]
            if c["check"] == "sigma.factored_agreement"
        )
        assert agreement["status"] == "holds"

    def test_eps_branch_selection(self):
        plus, _ = run_json(["verify", "guillot", "--eps", "+1", "--points", "2"])
        names = {c["check"] for c in plus["sections"]["checks"]}
        assert "bihamiltonian.decomposition[H2_plus]" in names
        assert "bihamiltonian.decomposition[H2_minus]" not in names
        minus, _ = run_json(["verify", "guillot", "--eps", "-1", "--points", "2"])
        names = {c["check"] for c in minus["sections"]["checks"]}
        assert "bihamiltonian.decomposition[H2_minus]" in names


class TestDerive:
    def test_guillot_forms(self):
        document, status = run_json(["derive", "guillot"])
        assert status == 0
        forms = document["sections"]["forms"]
        assert forms["beta"] == ["0", "1/(2*y^3)", "1/(2*y^2*z)"]
        assert forms["potential"]["scale"] == "2"
        assert forms["potential"]["A"][0] == "-1"

    def test_heisenberg_prints_omegas(self):
        document, status = run_json(["derive", "heisenberg_example"])
        assert status == 0
        assert document["sections"]["forms"]["omega2"] == ["0", "1", "-x"]


class TestIntegrate:
    def test_guillot_drift(self):
        document, status = run_json(["integrate", "guillot"])
        assert status == 0
        integration = document["sections"]["numeric"]["integration"]
        assert integration["steps"] == 200
        assert integration["drift"]["H1"] < 1e-8
        assert integration["drift"]["H2_plus"] < 1e-7
        assert "H2_minus" not in integration["drift"]

    def test_eps_minus_from_off_diagonal_point(self):
        document, status = run_json(
            ["integrate", "guillot", "--eps", "-1", "--from", "1,2,1", "--t", "0.1"]
        )
        assert status == 0
        assert document["sections"]["numeric"]["integration"]["drift"]["H2_minus"] < 1e-7


class TestSample:
    def test_single_check(self):
        document, status = run_json(
            ["sample", "guillot", "--check", "structure.dgamma", "--points", "10"]
        )
        assert status == 0
        samples = document["sections"]["numeric"]["samples"]
        assert len(samples) == 1
        assert samples[0]["check"] == "structure.dgamma"
        assert samples[0]["points"] == 10

    def test_unknown_check_is_a_usage_error(self):
        _, status, diagnostic = run(["sample", "guillot", "--check", "nope"])
        assert status == 2
        assert "unknown check" in diagnostic

    def test_determinism(self):
        first, _ = run_json(["sample", "guillot", "--seed", "3", "--points", "7"])
        second, _ = run_json(["sample", "guillot", "--seed", "3", "--points", "7"])
        assert json.dumps(first) == json.dumps(second)


class TestCheckFile:
    def test_valid_file(self, tmp_path):
        path = tmp_path / "guillot_copy.sys"
        path.write_text(system_source("guillot"))
        document, status = run_json(["check-file", str(path)])
        assert status == 0
        assert document["system"] == "guillot"

    def test_broken_brackets_exit_1(self, tmp_path):
        path = tmp_path / "broken.sys"
        path.write_text(
            "name: broken\nvariables: x, y, z\n"
            "v: x^2 + y^4; x*y; 2*y^2*z - x*z\n"
            "u: 2*x; y; z\n"  # wrong sign on the z component
            "w: -1; 0; 0\n"
        )
        document, status, diagnostic = run(["check-file", str(path)])
        assert status == 1
        rows = {c["check"]: c for c in document["sections"]["checks"]}
        assert rows["sl2.uv"]["status"] == "fails" or rows["sl2.vw"]["status"] == "fails"
        failing = [c for c in document["sections"]["checks"] if c["status"] == "fails"]
        assert all(c["residual"] for c in failing)

    def test_malformed_file_exit_2(self, tmp_path):
        path = tmp_path / "bad.sys"
        path.write_text("name: bad\nvariables: x, y, z\nv: x +; 0; 0\n")
        _, status, diagnostic = run(["check-file", str(path)])
        assert status == 2
        assert "line 3" in diagnostic

    def test_missing_file_exit_2(self):
        _, status, diagnostic = run(["check-file", "/nonexistent/f.sys"])
        assert status == 2

    def test_builtin_name_rejected(self):
        _, status, diagnostic = run(["check-file", "guillot"])
        assert status == 2

    def test_partial_file_checks_integrals(self, tmp_path):
        path = tmp_path / "partial.sys"
        path.write_text(
            "name: partial\nvariables: x, y, z\n"
            "v: x^2 + y^4; x*y; 2*y^2*z - x*z\n"
            "integral H1: x^2/y^2 - y^2\n"
            "multiplier: 1/(2*y^3*z)\n"
        )
        document, status = run_json(["check-file", str(path)])
        assert status == 0
        names = {c["check"] for c in document["sections"]["checks"]}
        assert names == {"integral.H1", "multiplier.invariance"}


class TestDocumentStability:
    def test_byte_identical_reports(self):
        a, _ = run_json(["verify", "guillot", "--points", "3"])
        b, _ = run_json(["verify", "guillot", "--points", "3"])
        assert json.dumps(a, indent=2) == json.dumps(b, indent=2)

    def test_schema_covers_all_commands(self, schema):
        for argv in (
            ["verify", "dh_symmetric", "--points", "2"],
            ["derive", "dh_symmetric"],
            ["integrate", "dh_symmetric", "--t", "0.05"],
            ["sample", "heisenberg_example", "--points", "2"],
        ):
            document, _ = run_json(argv)
            jsonschema.validate(document, schema)


class TestEntryPoint:
    def test_main_prints_text(self, capsys):
        status = main(["verify", "guillot", "--points", "2"])
        captured = capsys.readouterr()
        assert status == 0
        assert "M = 1/(2*y^3*z)" in captured.out
        assert "PASS" in captured.out
        assert "MISMATCH" in captured.out  # concordance lines are informational

    def test_main_json_mode(self, capsys):
        status = main(["derive", "guillot", "--json"])
        captured = capsys.readouterr()
        document = json.loads(captured.out)
        assert status == 0
        assert document["command"] == "derive"

    def test_module_invocation(self):
        result = subprocess.run(
            [sys.executable, "-m", "mcflow.cli", "derive", "guillot"],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert "1/(2*y^3*z)" in result.stdout
