import csv
import json
import math
import re

import pytest

from .utils import TEST_DATA_DIR, run_cli, working_directory

COMMANDS = ["energy", "residual", "pullback", "bubble", "rho", "convergence", "verify", "catalog"]


def curve_energy(output):
    return float(re.search(r"E\(phi, U\)  : (\S+)", output).group(1))


@pytest.mark.parametrize("help_cmd", ["-h", "--help"])
@pytest.mark.parametrize("command", [None, *COMMANDS])
def test_help(command, help_cmd):
    if command:
        args = [command, help_cmd]
    else:
        args = [help_cmd]
    result = run_cli(args)
    assert "Usage: " in result.output


def test_version():
    result = run_cli(["--version"])
    assert "supercurves, version" in result.output


class TestCatalog:
    def test_listing(self):
        result = run_cli(["catalog"])
        for heading in ("Instances:", "Families:", "Suites:"):
            assert heading in result.output
        assert "  isoperimetric" in result.output

    def test_instance_record(self):
        result = run_cli(["catalog", "-i", "power", "-p", "degree=2"])
        record = json.loads(result.output)
        assert record["degree"] == 2

    def test_parameter_without_value(self):
        result = run_cli(["catalog", "-i", "power", "-p", "degree"], exit_code=2)
        assert "Invalid parameter: degree" in result.output


class TestEnergy:
    def test_identity(self):
        result = run_cli(["energy", TEST_DATA_DIR / "identity.json"])
        assert "Energies of identity.json" in result.output
        assert curve_energy(result.output) == pytest.approx(math.pi, rel=1e-6)

    def test_disc_region(self):
        result = run_cli(["energy", TEST_DATA_DIR / "identity.json", "-r", "disc:0:0:0:1"])
        assert curve_energy(result.output) == pytest.approx(math.pi / 2, rel=1e-6)

    def test_invalid_region(self):
        result = run_cli(["energy", TEST_DATA_DIR / "identity.json", "-r", "ring"], exit_code=2)
        assert "Invalid region: ring" in result.output

    @pytest.mark.parametrize(
        "name, message",
        [
            ("wrong_shape.json", "wrong_shape.json.components"),
            ("degree_zero_bundle.json", "d = 0 is refused"),
            ("truncated.json", "invalid JSON"),
        ],
    )
    def test_bad_records(self, name, message):
        result = run_cli(["energy", TEST_DATA_DIR / name], exit_code=2)
        assert "Error: " in result.output
        assert message in result.output


def test_residual():
    result = run_cli(["residual", TEST_DATA_DIR / "cubic_with_section.json", "--resolution", "9"])
    assert "Residuals of cubic_with_section.json" in result.output


def test_pullback():
    result = run_cli(["pullback", TEST_DATA_DIR / "identity.json", "-m", "2", "0", "0", "0", "0", "0", "1", "0"])
    record = json.loads(result.output)
    assert record["section"]["bundle_degree"] == -1


class TestVerify:
    def test_quantization(self):
        result = run_cli(["verify", "quantization", "-n", "3"])
        assert "Suite quantization (count 3" in result.output
        assert "  status     : pass" in result.output

    def test_conformality(self):
        run_cli(["verify", "conformality", "-n", "10", "--seed", "5"])

    def test_isoperimetric_without_constant(self):
        result = run_cli(["verify", "isoperimetric", "-n", "3", "--constant", "0"], exit_code=1)
        assert "  status     : FAIL" in result.output

    def test_unknown_suite(self):
        run_cli(["verify", "everything"], exit_code=2)

    def test_seed_from_config_file(self):
        result = run_cli(["-c", TEST_DATA_DIR / "supercurves.toml", "verify", "conformality", "-n", "2"])
        assert "(count 2, seed 7)" in result.output

    def test_csv(self, tmp_path):
        target = tmp_path / "rows.csv"
        run_cli(["verify", "quantization", "-n", "2", "--csv", target], temp_work_dir=False)
        with open(target, encoding="utf-8", newline="") as file:
            rows = list(csv.reader(file))
        assert rows[0][-2:] == ["applicable", "passed"]
        assert len(rows) > 1

    def test_output_dir(self, tmp_path):
        with working_directory(tmp_path):
            run_cli(["-o", "tables", "verify", "quantization", "-n", "2"], temp_work_dir=False)
            assert (tmp_path / "tables" / "quantization.csv").is_file()


class TestRho:
    def test_same_curve(self):
        single = TEST_DATA_DIR / "single_identity.json"
        result = run_cli(["rho", single, single, "--eps", "0.5", "--samples", "1000"])
        assert "tree map f     : 1" in result.output
        assert "total          : " in result.output

    def test_invalid_limit(self):
        other = TEST_DATA_DIR / "bubble_limit.json"
        result = run_cli(["rho", TEST_DATA_DIR / "nodal_mismatch.json", other], exit_code=2)
        assert "nodal mismatch" in result.output

    def test_invalid_epsilon(self):
        single = TEST_DATA_DIR / "single_identity.json"
        result = run_cli(["rho", single, single, "--eps", "0"], exit_code=2)
        assert "Epsilon must be positive" in result.output


class TestConvergence:
    def test_bubbling(self):
        result = run_cli(["convergence", "--catalog", "bubbling", "--samples", "1000"])
        assert "Gromov convergence at eps = 0.5" in result.output
        assert "  overall       : pass" in result.output

    def test_planted_map_defect(self):
        result = run_cli(["convergence", "--catalog", "map", "--samples", "1000"], exit_code=1)
        assert "  Map           : FAIL" in result.output
        assert "  overall       : FAIL" in result.output

    def test_files(self):
        run_cli(
            [
                "convergence",
                "-l",
                TEST_DATA_DIR / "bubble_limit.json",
                "-s",
                TEST_DATA_DIR / "sequence",
                "--samples",
                "1000",
            ]
        )

    def test_sources_are_exclusive(self):
        run_cli(["convergence"], exit_code=2)
        run_cli(
            ["convergence", "--catalog", "bubbling", "-l", TEST_DATA_DIR / "bubble_limit.json"],
            exit_code=2,
        )
