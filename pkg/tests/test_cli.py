import json
import subprocess
import sys
from fractions import Fraction

import pytest

from gencal import cli, scenario

from conftest import ROOT

SCENARIOS = ROOT / "scenarios"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name,code", [
    ("g2_structure", 0), ("deficit_half", 0), ("torus", 0), ("exact_round_trip", 0),
    ("invalid_b", 3), ("malformed", 2),
])
def test_check_exit_codes(capsys, name, code):
    assert run(capsys, "check", "--scenario", SCENARIOS / f"{name}.json")[0] == code


def test_missing_file_is_parse_error(capsys, tmp_path):
    assert run(capsys, "check", "--scenario", tmp_path / "absent.json")[0] == 2


def test_failed_expectation(capsys, tmp_path):
    data = json.loads((SCENARIOS / "torus.json").read_text())
    data["pairs"][1]["expect"]["calibrated"] = True
    path = tmp_path / "wrong.json"
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "check", "--scenario", path)
    assert code == 1 and json.loads(out)["ok"] is False


def test_unknown_key_is_invalid(capsys, tmp_path):
    data = json.loads((SCENARIOS / "torus.json").read_text())
    data["pairs"][0]["L"] = [["0", "1", "0"]]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    assert run(capsys, "check", "--scenario", path)[0] in (2, 3)


class TestCheck:
    def test_deficit_half_is_exact(self, capsys):
        _, out, _ = run(capsys, "check", "--scenario", SCENARIOS / "deficit_half.json")
        pair = json.loads(out)["pairs"][0]
        assert pair["exact"] and pair["deficit"] == 0.5 and pair["pairing_value"] == 0.75

    def test_g2_planes_are_calibrated(self, capsys):
        _, out, _ = run(capsys, "check", "--scenario", SCENARIOS / "g2_structure.json")
        report = json.loads(out)
        assert report["ok"]
        assert any(p["calibrated"] and p["spinor_residual"] < 1e-7 for p in report["pairs"])

    def test_torus_pairs(self, capsys):
        _, out, _ = run(capsys, "check", "--scenario", SCENARIOS / "torus.json")
        pairs = {p["id"]: p for p in json.loads(out)["pairs"]}
        assert pairs["along-circle"]["calibrated"] and not pairs["across-circle"]["calibrated"]

    def test_field_section(self, capsys):
        _, out, _ = run(capsys, "check", "--scenario", SCENARIOS / "exact_round_trip.json")
        field = json.loads(out)["field"]
        assert field["tint"] is True and field["tint2"] is False

    def test_writes_out_file(self, capsys, tmp_path):
        target = tmp_path / "report.json"
        run(capsys, "check", "--scenario", SCENARIOS / "torus.json", "--out", target)
        assert json.loads(target.read_text())["scenario"] == "circle-radius-two"


class TestTdualize:
    def test_torus_values(self, capsys):
        code, out, err = run(capsys, "tdualize", "--scenario", SCENARIOS / "torus.json", "--direction", 2)
        dual = json.loads(out)
        assert code == 0
        assert dual["metric"]["g"] == [["1", "0"], ["0", "1/4"]]
        assert dual["dilaton"] == {"constant": "0", "log_arg": "1/4"}
        assert dual["calibration"]["form"] == "-2"
        assert "k 1 -> 0 (-1)" in err and "k 1 -> 2 (+1)" in err

    def test_needs_direction(self, capsys):
        assert run(capsys, "tdualize", "--scenario", SCENARIOS / "torus.json")[0] == 3

    def test_direction_range(self, capsys):
        assert run(capsys, "tdualize", "--scenario", SCENARIOS / "torus.json", "--direction", 5)[0] == 3

    def test_round_trip_is_byte_identical(self, capsys, tmp_path):
        once, twice = tmp_path / "once.json", tmp_path / "twice.json"
        run(capsys, "tdualize", "--scenario", SCENARIOS / "exact_round_trip.json", "--out", once)
        run(capsys, "tdualize", "--scenario", once, "--out", twice)
        original = scenario.dumps(scenario.to_dict(scenario.load(SCENARIOS / "exact_round_trip.json")))
        assert twice.read_text() == original

    def test_fierz_form_written_out(self, capsys):
        code, out, err = run(capsys, "tdualize", "--scenario", SCENARIOS / "g2_structure.json", "--direction", 7)
        dual = json.loads(out)
        assert code == 0 and "spinors" not in dual and "form" in dual["calibration"]
        assert "fierz form written out" in err

    def test_dual_dilaton_exact(self, capsys):
        sc = scenario.load(SCENARIOS / "torus.json")
        dual, _ = cli.tdualize_scenario(sc, 2)
        assert dual.dilaton.log_arg == Fraction(1, 4)


class TestSuite:
    def test_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run(capsys, "suite", "--seed", 42, "--out", a)[0] == 0
        run(capsys, "suite", "--seed", 42, "--out", b)
        assert a.read_bytes() == b.read_bytes()

    def test_single_module(self, capsys):
        code, out, _ = run(capsys, "suite", "--suite", "exterior", "--seed", 1)
        report = json.loads(out)
        assert code == 0 and report["failed"] == 0
        assert {p["module"] for p in report["properties"]} == {"exterior"}


def test_console_script():
    done = subprocess.run([sys.executable, "-m", "gencal.cli", "--version"], capture_output=True, text=True)
    assert done.returncode == 0 and done.stdout.startswith("gencal ")
