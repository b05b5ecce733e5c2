import csv
import io
import json

import pytest

from p3tau import __version__
from p3tau.cli import main, parse_complex, read_sweep_config, to_jsonable


def run(capsys, *argv):
    status = main(list(argv))
    out = capsys.readouterr().out
    return status, out


def as_complex(d):
    return complex(d["re"], d["im"])


def test_parse_complex():
    assert parse_complex("0.25,0") == 0.25
    assert parse_complex("0.1,-0.2") == complex(0.1, -0.2)
    assert parse_complex("3") == 3
    with pytest.raises(ValueError):
        parse_complex("1,2,3")


def test_to_jsonable_nested():
    doc = to_jsonable({"a": [1 + 2j, {"b": 3.0}], "c": float("nan")})
    assert doc == {"a": [{"re": 1.0, "im": 2.0}, {"b": 3.0}], "c": "nan"}


def test_connect_normalization_point(capsys):
    status, out = run(capsys, "connect", "--sigma", "0.25,0", "--eta", "0.25,0")
    assert status == 0
    doc = json.loads(out)
    assert doc["version"] == __version__
    r = doc["result"]
    for key in ("alpha", "beta", "p", "q", "nu", "b_plus", "b_minus"):
        assert abs(as_complex(r[key])) < 1e-15, key
    assert r["rho"]["error"] == "singular"


def test_connect_accepts_cauchy_data(capsys):
    status, out = run(capsys, "connect", "--alpha", "0,-0.4", "--beta=-1.2566370614359172,0.03488869740682399")
    assert status == 0
    r = json.loads(out)["result"]
    assert abs(as_complex(r["sigma"]) - 0.3) < 1e-12
    assert abs(as_complex(r["eta"]) - 0.15) < 1e-12


def test_invalid_parameters_exit_one(capsys):
    status, out = run(capsys, "connect", "--sigma", "0.25,0", "--eta", "0.5,0")
    assert status == 1
    err = json.loads(out)["error"]
    assert err["kind"] == "validation" and err["condition"] == "sin 2 pi eta != 0"


def test_both_parameterizations_rejected(capsys):
    status, out = run(capsys, "connect", "--sigma", "0.3", "--eta", "0.15", "--alpha", "0")
    assert status == 1


def test_convergence_failure_exit_two(capsys, monkeypatch):
    from p3tau import cli
    from p3tau.errors import ConvergenceError

    def fail(*args, **kwargs):
        raise ConvergenceError("did not converge", tolerance=1e-12, achieved=1e-6)

    monkeypatch.setattr(cli, "_ratio", fail)
    status, out = run(capsys, "ratio", "--sigma", "0.3", "--eta", "0.15")
    assert status == 2
    err = json.loads(out)["error"]
    assert err["kind"] == "convergence" and err["achieved"] == 1e-6


def test_ratio_normalization_point(capsys):
    status, out = run(capsys, "ratio", "--sigma", "0.25,0", "--eta", "0.25,0")
    assert status == 0
    doc = json.loads(out)
    assert doc["tolerances"] == {"t0": 1e-4, "t1": 200.0, "tol": 1e-12}
    for method in ("closed_form", "quadrature", "action"):
        assert abs(as_complex(doc["result"][method]["log_ratio"])) < 1e-8


def test_ratio_reference_agrees_within_estimate(capsys):
    status, out = run(capsys, "ratio", "--sigma", "0.3,0", "--eta", "0.15,0")
    r = json.loads(out)["result"]
    assert r["quadrature_minus_closed_form"] <= r["quadrature"]["error_estimate"]


def test_output_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["chi", "--sigma", "0.3", "--eta", "0.15", "--output", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "runtime_seconds" not in json.loads(a.read_text())


def test_timing_flag(capsys):
    status, out = run(capsys, "chi", "--sigma", "0.3", "--eta", "0.15", "--timing")
    assert json.loads(out)["runtime_seconds"] >= 0


def test_env_overrides_default_tolerance(capsys, monkeypatch):
    monkeypatch.setenv("P3TAU_TOL", "1e-9")
    status, out = run(capsys, "solve", "--sigma", "0.3", "--eta", "0.15", "--x1", "5", "--samples", "3",
                      "--format", "json")
    assert status == 0
    assert json.loads(out)["tolerances"]["tol"] == 1e-9
    monkeypatch.setenv("P3TAU_TOL", "oops")
    status, _ = run(capsys, "chi", "--sigma", "0.3", "--eta", "0.15")
    assert status == 1


def test_solve_csv(capsys):
    status, out = run(capsys, "solve", "--sigma", "0.3", "--eta", "0.15", "--x1", "10", "--samples", "5")
    assert status == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x", "re_u", "im_u", "re_ux", "im_ux"]
    assert len(rows) == 6
    assert float(rows[-1][0]) == 10.0


def test_chi_routes(capsys):
    status, out = run(capsys, "chi", "--sigma", "0.3", "--eta", "0.15")
    assert json.loads(out)["result"]["difference"] < 1e-10


def test_mb_check(capsys):
    status, out = run(capsys, "mb-check", "--sigma", "0.3", "--eta", "0.15", "--xs", "1,5")
    assert status == 0
    r = json.loads(out)["result"]
    assert len(r["reports"]) == 2
    assert all(3 < v < 5 for v in r["halving_ratios"].values())


def test_sweep(tmp_path, capsys):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("# chi over a small grid\ncommand = chi\nsigma = 0.2 0.3\neta = 0.1 0.5\nworkers = 2\n")
    status, out = run(capsys, "sweep", str(cfg))
    assert status == 0
    points = json.loads(out)["result"]["points"]
    assert [(p["sigma"]["re"], p["eta"]["re"]) for p in points] == [(0.2, 0.1), (0.2, 0.5), (0.3, 0.1), (0.3, 0.5)]
    assert [p["status"] for p in points] == ["ok", "invalid", "ok", "invalid"]


def test_sweep_config_errors(tmp_path):
    from p3tau.errors import ValidationError

    cfg = tmp_path / "bad.cfg"
    cfg.write_text("sigma = 0.3\n")
    with pytest.raises(ValidationError):
        read_sweep_config(str(cfg))
    cfg.write_text("sigma 0.3\n")
    with pytest.raises(ValidationError):
        read_sweep_config(str(cfg))


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "p3tau", "connect", "--sigma", "0.3", "--eta", "0.15"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["command"] == "connect"
