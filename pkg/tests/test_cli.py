import json

import numpy as np
import pytest

from homfield.cli import main
from homfield.report import read_csv


def _run(tmp_path, *argv):
    out = tmp_path / "out"
    code = main([*argv, "--out", str(out)])
    rep = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, rep, out


def test_analyze_example3(tmp_path):
    code, rep, out = _run(tmp_path, "analyze", "--preset", "example3")
    assert code == 0
    res = rep["result"]
    assert np.allclose(res["mu"], [0.0, 1.0], atol=1e-10)
    assert len(res["rays"]) == 8 and res["condition_p"] is False
    assert {"rays.csv", "field.csv", "field.svg"} <= {p.name for p in out.iterdir()}


def test_analyze_elliptic(tmp_path):
    code, rep, _ = _run(tmp_path, "analyze", "--preset", "elliptic")
    assert code == 0
    res = rep["result"]
    assert res["rays"] == [] and res["condition_p"] is True and res["liouville"] is True


def test_render_envelope_matches_closed_forms(tmp_path):
    code, rep, out = _run(tmp_path, "render", "--preset", "example1", "--figure", "envelope")
    assert code == 0
    t = read_csv(out / "envelope.csv")
    s = np.sin(t["theta"])
    assert np.max(np.abs(t["rho"] - np.exp(np.abs(s)))) < 1e-8
    assert np.max(np.abs(t["R_envelope"] - np.exp(np.abs(s) - s))) < 1e-8
    assert (out / "envelope.svg").read_text().startswith("<?xml")


def test_csv_and_svg_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for d in (a, b):
        assert main(["render", "--preset", "example1", "--figure", "envelope", "--out", str(d)]) == 0
    assert (a / "envelope.csv").read_bytes() == (b / "envelope.csv").read_bytes()
    assert (a / "envelope.svg").read_bytes() == (b / "envelope.svg").read_bytes()


@pytest.mark.parametrize("argv", [
    ["analyze", "--preset", "nosuch"],
    ["analyze", "--field", "/nonexistent/field.json"],
    ["envelope", "--preset", "example3"],
    ["rh-solve", "--preset", "example2:k=1,lam=1.1", "--kappa-data", "KAPPA2"],
])
def test_precondition_failures_exit_2(tmp_path, argv, capsys):
    # winding number 2 violates the index gate when (Re lam - 1)/Re(1/mu) = 0.1
    kappa2 = tmp_path / "kappa2.json"
    kappa2.write_text(json.dumps({"Lambda2": [[2, 1, 0]], "Phi2": [[0, 1, 0]]}))
    argv = [str(kappa2) if a == "KAPPA2" else a for a in argv]
    code, _, _ = _run(tmp_path, *argv)
    assert code == 2
    assert "precondition failed" in capsys.readouterr().err


def test_malformed_field_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(tmp_path, "analyze", "--field", str(bad))[0] == 2
    bad.write_text(json.dumps({"lambda": [2, 0], "p": [[0, 1, 0]]}))
    assert _run(tmp_path, "analyze", "--field", str(bad))[0] == 2


def test_field_file_ingestion(tmp_path):
    desc = {"lambda": [2, 0], "p": [[0, 1, 0]],
            "q": [[2, 1, 0], [-2, 1, 0], [4, 0, 1], [-4, 0, -1], [0, 0, 1]]}
    path = tmp_path / "ex3.json"
    path.write_text(json.dumps(desc))
    code, rep, _ = _run(tmp_path, "analyze", "--field", str(path))
    assert code == 0
    assert np.allclose(rep["result"]["mu"], [0.0, 1.0], atol=1e-10)
    assert len(rep["result"]["rays"]) == 8
    poly = tmp_path / "poly.json"
    poly.write_text(json.dumps({"A": [[0, 0], 0.5, [0, -1]], "B": [1, 0, 0]}))
    assert _run(tmp_path, "analyze", "--field", str(poly))[0] == 0


@pytest.mark.parametrize("argv", [
    ["first-integral", "--preset", "example3"],
    ["envelope", "--preset", "example1"],
    ["resonance", "--preset", "example3"],
    ["resonance", "--mu", "1.4142135623730951", "--lam", "2.5"],
    ["solve-homogeneous", "--preset", "example2:k=1", "--sigma", "1.5"],
    ["solve-series", "--preset", "example2:k=1,lam=2.5", "--J", "8"],
    ["rh-solve", "--preset", "example2:k=1"],
    ["render", "--preset", "example3", "--figure", "first-integral"],
])
def test_subcommands_succeed(tmp_path, argv):
    code, rep, out = _run(tmp_path, *argv)
    assert code == 0
    assert rep["command"] == argv[0]
    assert any(p.suffix in (".csv", ".svg") for p in out.iterdir())


def test_weak_check_report(tmp_path):
    code, rep, out = _run(tmp_path, "weak-check", "--preset", "hamiltonian", "--count", "2")
    assert code == 0
    res = rep["result"]
    assert res["delta"]["defect"] <= 1e-3
    assert res["dirac"]["max_defect"] <= 1e-5 and res["dirac"]["pairs"] == 3
    assert (out / "delta_ladder.csv").exists()


def test_rh_free_params_file(tmp_path):
    fp = tmp_path / "free.json"
    fp.write_text(json.dumps({"beta0": 0.3, "c": [[0.1, -0.2]]}))
    code, rep, _ = _run(tmp_path, "rh-solve", "--preset", "example2:k=1", "--free-params", str(fp))
    assert code == 0
    assert rep["result"]["boundary_residual"] <= 1e-6


def test_bad_grid_rejected(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["analyze", "--grid", "1000", "--out", str(tmp_path)])
    assert e.value.code == 2
