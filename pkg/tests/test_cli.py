import json
import subprocess
import sys
from pathlib import Path

import pytest

from lieparam.cli import EXIT_CERTIFICATE, EXIT_INPUT, EXIT_OK, main

DATA = Path(__file__).resolve().parent.parent / "data"


def run_json(capsys, *argv):
    code = main([*argv, "--output", "json"])
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_model_of_point(capsys):
    code, rep = run_json(capsys, "model", str(DATA / "point.json"), "--cap", "4")
    assert code == EXIT_OK
    pres = rep["results"]["presentation"]
    assert pres["generators"] == [{"name": "p", "degree": -1}] and pres["mc"] == ["p"]
    assert rep["results"]["check"] is True


def test_model_of_pointed_circle(capsys):
    code, rep = run_json(capsys, "model", str(DATA / "circle.json"), "--pointed", "--cap", "4")
    pres = rep["results"]["presentation"]
    assert code == EXIT_OK and pres["generators"] == [{"name": "e", "degree": 0}] and pres["differential"] == {}


def test_model_of_interval(capsys):
    code, rep = run_json(capsys, "model", str(DATA / "delta1.json"), "--cap", "5")
    names = sorted(g["name"] for g in rep["results"]["presentation"]["generators"])
    assert code == EXIT_OK and names == ["a", "b", "c"]


def test_psi_of_sphere(capsys):
    code, rep = run_json(capsys, "psi", f"sphere:{DATA / 's2_base.json'}", "--cap", "5", "--levels", "4",
                         "--window", "0:3")
    assert code == EXIT_OK
    assert rep["results"]["homology"] == {"0": 1, "1": 1, "2": 1, "3": 1}
    assert rep["results"]["stabilized"] is True


def test_psi_shift_option(capsys):
    base = f"quadratic:{DATA / 's2_base.json'}"
    _, lo = run_json(capsys, "psi", base, "--cap", "5", "--window", "0:2")
    _, hi = run_json(capsys, "psi", base, "--cap", "5", "--window", "1:3", "--shift", "1")
    assert [hi["results"]["homology"][str(j + 1)] for j in range(3)] == [
        lo["results"]["homology"][str(j)] for j in range(3)]


def test_stable_homology_reductions_agree(capsys):
    reports = []
    for reduction in ("full", "linear", "indecomposable"):
        code, rep = run_json(capsys, "stable-homology", f"quadratic:{DATA / 's2_base.json'}", "--cap", "5",
                             "--window=-1:1", "--reduction", reduction)
        assert code == EXIT_OK
        reports.append(rep["results"]["stable_homology"]["dims"])
    assert reports[0] == reports[1] == reports[2]


def test_ext_from_enveloping_algebra(capsys):
    code, rep = run_json(capsys, "ext", f"uhat:{DATA / 's2_base.json'}", f"uhat:{DATA / 's2_base.json'}",
                         "--cap", "4", "--window", "0:3")
    assert code == EXIT_OK
    assert rep["results"]["ext"]["dims"] == {"0": 1, "1": 1, "2": 1, "3": 1}


@pytest.mark.parametrize("signs,linear", [("stated", False), ("koszul", True)])
def test_smash_with_sphere(capsys, signs, linear):
    code, rep = run_json(capsys, "smash", f"sphere:{DATA / 's2_base.json'}", "--cap", "3", "--levels", "3",
                         "--window", "0:3", "--signs", signs)
    res = rep["results"]
    assert code == EXIT_OK and res["equal"] and res["chain_isomorphism"]
    assert res["linear"] is linear


def test_gauge_trials(capsys):
    code, rep = run_json(capsys, "gauge", "ls-interval", "--cap", "4", "--trials", "5", "--seed", "3")
    assert code == EXIT_OK and rep["results"] == {"trials": 5, "mc": 5, "composition": 5}


def test_gauge_single_element(capsys):
    code, rep = run_json(capsys, "gauge", "ls-interval", "--cap", "4", "--z", '["gen", "c"]', "--y", '["gen", "a"]')
    assert code == EXIT_OK and rep["results"]["mc"] is True


def test_check_simplex(capsys):
    code, rep = run_json(capsys, "check", "simplex:2", "--cap", "3")
    assert code == EXIT_OK and rep["results"]["check"]["ok"] is True


def test_missing_file_is_input_error(capsys, tmp_path):
    assert main(["check", str(tmp_path / "absent.json")]) == EXIT_INPUT
    assert "cannot read" in capsys.readouterr().err


def test_bad_json_is_reported(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["check", str(bad)]) != EXIT_OK
    assert "not valid JSON" in capsys.readouterr().err


def test_bad_element_is_reported(capsys):
    assert main(["gauge", "ls-interval", "--z", "[oops"]) != EXIT_OK


def test_non_mc_start_is_an_input_error(capsys):
    code, _ = run_json(capsys, "gauge", "ls-interval", "--cap", "4", "--z", '["gen", "c"]',
                       "--y", '["scal", "2", ["gen", "a"]]')
    assert code == EXIT_INPUT


@pytest.mark.parametrize("value", ["0", "-2", "many"])
def test_thread_variable_is_validated(capsys, monkeypatch, value):
    monkeypatch.setenv("LIEPARAM_THREADS", value)
    assert main(["check", "simplex:1", "--cap", "3"]) == EXIT_INPUT
    assert "LIEPARAM_THREADS" in capsys.readouterr().err


def test_thread_variable_does_not_change_output(capsys, monkeypatch):
    argv = ["psi", f"sphere:{DATA / 's2_base.json'}", "--cap", "4", "--levels", "3", "--window", "0:2"]
    assert main(argv) == EXIT_OK
    first = capsys.readouterr().out
    monkeypatch.setenv("LIEPARAM_THREADS", "4")
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == first


def test_window_syntax(capsys):
    with pytest.raises(SystemExit):
        main(["check", "simplex:1", "--window", "3:1"])


def test_repeated_runs_are_byte_identical():
    argv = [sys.executable, "-m", "lieparam.cli", "gauge", "ls-interval", "--cap", "4", "--trials", "4",
            "--seed", "9", "--output", "json"]
    runs = [subprocess.run(argv, capture_output=True, check=True).stdout for _ in range(2)]
    assert runs[0] == runs[1] and runs[0]


def test_nonzero_square_is_a_certificate_failure(capsys, tmp_path):
    pres = {"generators": [{"name": "a", "degree": 0}, {"name": "b", "degree": 1}, {"name": "c", "degree": 2}],
            "differential": {"b": ["gen", "a"], "c": ["gen", "b"]}}
    path = tmp_path / "bad_square.json"
    path.write_text(json.dumps(pres))
    code, rep = run_json(capsys, "check", str(path), "--cap", "3")
    assert code == EXIT_CERTIFICATE and rep["results"]["check"]["ok"] is False
