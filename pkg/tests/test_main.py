import dataclasses
import json

import pytest

import Diamond.analysis
from Diamond.analysis import analyze
from Diamond.channel import ChannelGains
from Diamond.main import EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main
from Diamond.utilities.errors import SolverFailure

QUIET = ["--log-file", ""]


def run(capsys, *argv):
    code = main(QUIET + list(argv))
    return code, capsys.readouterr()


def test_analyze_json(capsys):
    code, out = run(capsys, "analyze", "--g01", "15", "--g02", "3", "--g13", "3", "--g23", "15", "--json")
    assert code == EXIT_OK
    payload = json.loads(out.out)
    assert payload["achievable"]["rate"] == pytest.approx(4.0 / 3.0)
    assert payload["region"]["label"] == "B2"
    assert payload["violations"] == []


def test_json_floats_are_exact(capsys):
    gains = ChannelGains(0.37, 12.5, 4.1, 880.0)
    code, out = run(capsys, "analyze", "--g01", "0.37", "--g02", "12.5", "--g13", "4.1", "--g23", "880", "--json")
    assert code == EXIT_OK
    payload = json.loads(out.out)
    report = analyze(gains)
    assert payload["upper"]["value"] == report.upper.value
    assert payload["achievable"]["rate"] == report.achievable.rate
    assert payload["caps"]["C123"] == report.caps.C123
    assert payload["measured_gap"] == report.measured_gap


def test_analyze_text_and_db(capsys):
    code, out = run(capsys, "analyze", "--g01", "10", "--g02", "10", "--g13", "0", "--g23", "0", "--db")
    assert code == EXIT_OK
    assert "DIAMOND CHANNEL REPORT" in out.out
    assert "Recommended scheme" in out.out


def test_invalid_gain(capsys):
    code, out = run(capsys, "analyze", "--g01", "-1", "--g02", "3", "--g13", "3", "--g23", "3")
    assert code == EXIT_USAGE
    assert "error" in out.err


def test_missing_argument(capsys):
    assert run(capsys, "analyze", "--g01", "1")[0] == EXIT_USAGE
    assert run(capsys)[0] == EXIT_USAGE


def test_help_exits_cleanly(capsys):
    assert run(capsys, "--help")[0] == EXIT_OK


def test_sweep_is_reproducible(capsys, tmp_path):
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    for path in (first, second):
        code, _ = run(capsys, "sweep", "--count", "8", "--seed", "42", "--out", str(path))
        assert code == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    assert first.read_text().splitlines()[0].startswith("g01,g02,g13,g23,C01")


def test_sweep_json_summary(capsys, tmp_path):
    code, out = run(capsys, "sweep", "--count", "6", "--seed", "1", "--out", str(tmp_path / "s.csv"), "--json")
    assert code == EXIT_OK
    summary = json.loads(out.out)
    assert summary["evaluated"] == 6
    assert summary["violations"] == 0


def test_sweep_usage_errors(capsys, tmp_path):
    out = str(tmp_path / "s.csv")
    assert run(capsys, "sweep", "--count", "0", "--out", out)[0] == EXIT_USAGE
    assert run(capsys, "sweep", "--count", "3", "--out", out, "--gain-min", "5", "--gain-max", "1")[0] == EXIT_USAGE
    assert run(capsys, "sweep", "--count", "3", "--out", str(tmp_path / "missing" / "s.csv"))[0] == EXIT_USAGE
    assert run(capsys, "sweep", "--count", "3", "--out", str(tmp_path))[0] == EXIT_USAGE


def test_verify_passes(capsys):
    code, out = run(capsys, "verify", "--count", "5", "--delta0-count", "3", "--json")
    assert code == EXIT_OK
    assert json.loads(out.out)["violations"] == 0


def test_broken_bound_is_reported(capsys, monkeypatch):
    real = Diamond.analysis.upper_bound

    def loosened(caps):
        bound = real(caps)
        return dataclasses.replace(bound, value=bound.value - 1.0)

    monkeypatch.setattr(Diamond.analysis, "upper_bound", loosened)
    code, out = run(capsys, "analyze", "--g01", "3", "--g02", "3", "--g13", "3", "--g23", "3")
    assert code == EXIT_VIOLATION
    assert "VIOLATION" in out.out


def test_gdof(capsys):
    code, out = run(capsys, "gdof", "--a01", "2", "--a02", "1", "--a13", "1", "--a23", "2", "--pmax", "1e6", "--json")
    assert code == EXIT_OK
    payload = json.loads(out.out)
    assert payload["closed_forms"]["upper"] == pytest.approx(4.0 / 3.0)
    assert payload["numeric"][-1]["P"] == 1e6


def test_gdof_usage_errors(capsys):
    assert run(capsys, "gdof", "--a01", "-1", "--a02", "1", "--a13", "1", "--a23", "1")[0] == EXIT_USAGE
    assert run(capsys, "gdof", "--a01", "1", "--a02", "1", "--a13", "1", "--a23", "1", "--pmax", "10")[0] == EXIT_USAGE


def _failing_solver(*args, **kwargs):
    raise SolverFailure("simplex exceeded 60 iterations")


@pytest.mark.parametrize("target, argv", [
    ("Diamond.gdof.analyze", ["gdof", "--a01", "2", "--a02", "1", "--a13", "1", "--a23", "2", "--pmax", "1e3"]),
    ("Diamond.main.analyze", ["analyze", "--g01", "3", "--g02", "3", "--g13", "3", "--g23", "3"]),
    ("Diamond.main.run_verification", ["verify", "--count", "2"]),
    ("Diamond.main.sweep", ["sweep", "--count", "2", "--out", "{out}"]),
])
def test_solver_failure_exits_nonzero(capsys, monkeypatch, tmp_path, target, argv):
    monkeypatch.setattr(target, _failing_solver)
    argv = [arg.replace("{out}", str(tmp_path / "sweep.csv")) for arg in argv]
    code, out = run(capsys, *argv)
    assert code == EXIT_VIOLATION
    assert "simplex exceeded" in out.err
