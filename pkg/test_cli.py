#!/usr/bin/env python3
"""
Command line: exit codes, report files and config-file handling
"""

import csv
import json

import pytest

from signcorr import cli
from signcorr.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main
from signcorr.errors import NonConvergenceError


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_predict_theorem2(capsys):
    code, out, _ = _run(capsys, "predict", "--method", "theorem2", "--ratio", "1/5")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["method"] == "theorem2"
    assert payload["limit"] == pytest.approx(0.6)


@pytest.mark.parametrize("argv, expected", [
    (["--method", "prop1", "--x", "0.3", "--y", "1.5"], 0.6),
    (["--method", "prop2", "--r1", "0.5", "--r2", "1.5", "--d", "3"], 2 / 3),
    (["--method", "theorem1", "--ratio", "1/3", "--theta", "1/4"], 2 / 3),
    (["--method", "orbit", "--angle", "1/10", "--ratio", "3"], 0.2),
    (["--method", "wkb", "--ratio", "1/5"], 0.6),
])
def test_predict_methods(capsys, argv, expected):
    code, out, _ = _run(capsys, "predict", *argv)
    assert code == EXIT_OK
    assert json.loads(out)["limit"] == pytest.approx(expected)


@pytest.mark.parametrize("argv", [
    ["--method", "prop1", "--x", "0.3"],
    ["--method", "theorem2"],
    ["--method", "wkb", "--ratio", "irrational"],
    ["--method", "wkb", "--ratio", "1/3", "--wkb-family", "laguerre"],
    ["--method", "orbit", "--angle", "1/10", "--ratio", "3/2"],
    ["--method", "theorem2", "--ratio", "0.5"],
])
def test_predict_usage_errors(capsys, argv):
    code, _, err = _run(capsys, "predict", *argv)
    assert code == EXIT_USAGE
    assert err.startswith("error:")


def test_average(capsys):
    code, out, _ = _run(capsys, "average", "--p", "1", "--q", "3")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["closed_form"] == pytest.approx(-1 / 3)
    assert payload["difference"] <= 1e-12
    code, out, _ = _run(capsys, "average", "--p", "2", "--q", "5", "--alpha", "0.3", "--beta", "0.7")
    assert json.loads(out)["closed_form"] == 0.0


def test_average_rejects_zero_direction(capsys):
    code, _, err = _run(capsys, "average", "--p", "0", "--q", "3")
    assert code == EXIT_USAGE
    assert "error" in err


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["estimate", "--n", "10"],
    ["estimate", "--family", "hermite", "--n", "ten"],
    ["estimate", "--family", "hermite", "--n", "10", "--x", "0.3"],
    ["estimate", "--family", "chebyshev", "--n", "10", "--angle", "1/4", "--ratio", "3"],
])
def test_usage_errors_exit_one(capsys, tmp_path, argv):
    if argv:
        argv = argv + ["--output-dir", str(tmp_path)] if argv[0] == "estimate" else argv
    code, _, _ = _run(capsys, *argv)
    assert code == EXIT_USAGE


def test_estimate_writes_reports(capsys, tmp_path):
    code, out, _ = _run(
        capsys, "estimate", "--family", "chebyshev", "--angle", "1/10", "--ratio", "3", "--n", "1000",
        "--output-dir", str(tmp_path),
    )
    assert code == EXIT_OK
    summary = json.loads(out)
    assert summary["estimate"] == pytest.approx(0.2)
    assert summary["diagnostics"]["orbit_density"] == "1/5"

    report = json.loads((tmp_path / "estimate-chebyshev.json").read_text())
    for key in ("family", "method", "params", "n", "agree", "zero_hits", "estimate", "prediction", "checkpoints",
                "diagnostics", "meta"):
        assert key in report
    assert set(report["meta"]) == {"timestamp", "version", "config_hash", "runtime_seconds"}

    with open(tmp_path / "estimate-chebyshev.csv", newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["n", "agree", "estimate", "remainder"]
    assert [int(r[0]) for r in rows[1:]] == [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1000]


def test_scan_writes_remainder_series(capsys, tmp_path):
    code, out, _ = _run(
        capsys, "scan", "--family", "chebyshev", "--angle", "1/10", "--ratio", "3", "--n", "10000",
        "--stride", "1000", "--format", "csv", "--name", "tenth", "--output-dir", str(tmp_path),
    )
    assert code == EXIT_OK
    assert json.loads(out)["max_abs_remainder"] == pytest.approx(0.8)
    assert not (tmp_path / "tenth.json").exists()
    with open(tmp_path / "tenth.csv", newline="") as f:
        rows = list(csv.reader(f))
    assert len(rows) == 11
    assert all(float(r[3]) == pytest.approx(0.0, abs=1e-9) for r in rows[1:])


def test_scan_with_explicit_target(capsys, tmp_path):
    code, out, _ = _run(
        capsys, "scan", "--family", "hermite", "--x", "0.3", "--y", "-0.3", "--n", "1000", "--target", "1/2",
        "--predictor", "none", "--format", "json", "--output-dir", str(tmp_path),
    )
    assert code == EXIT_OK
    summary = json.loads(out)
    assert summary["prediction"] is None
    assert summary["max_abs_remainder"] == pytest.approx(0.5)


def test_config_file_with_flag_override(capsys, tmp_path):
    config = tmp_path / "run.conf"
    config.write_text("# hermite run\nfamily = hermite\nn = 500\nx = 0.3\ny = 1.5\nformat = json\n")
    code, out, _ = _run(capsys, "estimate", "--config", str(config), "--n", "100", "--output-dir", str(tmp_path))
    assert code == EXIT_OK
    summary = json.loads(out)
    assert summary["n"] == 100
    assert summary["family"] == "hermite"
    assert summary["outputs"] == [str(tmp_path / "estimate-hermite.json")]


def test_config_file_rejects_unknown_key(capsys, tmp_path):
    config = tmp_path / "bad.conf"
    config.write_text("family = hermite\ncolour = blue\n")
    code, _, err = _run(capsys, "estimate", "--config", str(config), "--output-dir", str(tmp_path))
    assert code == EXIT_USAGE
    assert "colour" in err


def test_reports_are_deterministic(capsys, tmp_path):
    common = ["estimate", "--family", "hermite", "--x", "0.3", "--y", "1.5", "--n", "3000", "--format", "json",
              "--output-dir", str(tmp_path)]
    assert main(common + ["--name", "first", "--threads", "1"]) == EXIT_OK
    assert main(common + ["--name", "second", "--threads", "4"]) == EXIT_OK
    capsys.readouterr()
    first = json.loads((tmp_path / "first.json").read_text())
    second = json.loads((tmp_path / "second.json").read_text())
    assert first.pop("meta")["config_hash"] == second.pop("meta")["config_hash"]
    assert first == second


def test_solve_writes_cache(capsys, tmp_path):
    cache = tmp_path / "harmonic.json"
    code, out, _ = _run(
        capsys, "solve", "--potential", "0,1", "--n-max", "5", "--cache", str(cache), "--output-dir", str(tmp_path),
    )
    assert code == EXIT_OK
    summary = json.loads(out)
    assert summary["levels"] == 6
    assert summary["cache"] == str(cache)
    assert cache.exists()
    table = json.loads((tmp_path / "solve.json").read_text())
    assert [level["n"] for level in table["levels"]] == list(range(6))
    assert all(level["sign_normalized"] for level in table["levels"])
    assert "lambda" in table["levels"][0]


def test_solve_rejects_bad_potential(capsys, tmp_path):
    code, _, _ = _run(capsys, "solve", "--potential", "0,-1", "--n-max", "5", "--output-dir", str(tmp_path))
    assert code == EXIT_USAGE


def test_numerical_failure_exits_two(capsys, tmp_path, monkeypatch):
    def fail(*args, **kwargs):
        raise NonConvergenceError("Eigenvalue bisection did not converge", index=7, eigenvalue=1.5)

    monkeypatch.setattr(cli, "solve_eigenpairs", fail)
    code, _, err = _run(capsys, "solve", "--potential", "0,0,1", "--n-max", "10", "--output-dir", str(tmp_path))
    assert code == EXIT_NUMERICAL
    assert "index 7" in err
    assert "eigenvalue 1.5" in err
