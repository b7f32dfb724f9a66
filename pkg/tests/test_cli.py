import csv
import io
import json
import math
import subprocess
import sys

import pytest

from sharpconst import cli
from sharpconst.errors import ToleranceNotMetError
from sharpconst.inequalities import Estimate, make_report


def run_cli(argv, capsys, environ=None):
    code = cli.main(argv, environ or {})
    out = capsys.readouterr()
    return code, out.out, out.err


def _strip_run(text):
    doc = json.loads(text)
    doc.pop("run")
    return doc


def _tagged_values(node, path=""):
    """Yield (path, dict) for every object carrying a numeric 'value'."""
    if isinstance(node, dict):
        if "value" in node and isinstance(node["value"], (int, float)):
            yield path, node
        for k, v in node.items():
            yield from _tagged_values(v, f"{path}/{k}")
    elif isinstance(node, list):
        for i, v in enumerate(node):
            yield from _tagged_values(v, f"{path}/{i}")


def test_eigen_corollary2(capsys):
    code, out, _ = run_cli(["eigen", "--problem", "corollary2", "--tol", "1e-4"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    lam = doc["results"]["eigen"]["lambda"]
    assert lam["provenance"] == "eigenvalue"
    assert abs(lam["value"] - 0.1564) < 2e-3
    assert doc["results"]["eigen"]["reference"]["provenance"] == "paper_value"
    assert len(doc["results"]["eigen"]["convergence"]) >= 3
    assert "eigen" in doc["run"]["timings"]


def test_constant_hs_critical(capsys):
    code, out, _ = run_cli(["constant", "--name", "hs_critical", "--p", "1", "--a", "0", "--b", "0", "--n", "2"],
                           capsys)
    assert code == 0
    c = json.loads(out)["results"]["constant"]["constant"]
    assert c == {"value": pytest.approx(0.28209479177387814, rel=1e-14), "provenance": "closed_form"}


@pytest.mark.parametrize("argv,value", [
    (["--name", "sobolev", "--m", "3"], 5.4779),
    (["--name", "hardy_remainder", "--n", "2"], 3 * math.pi ** (2 / 3) / 4),
    (["--name", "capacitary_Apq", "--p", "2", "--q", "4"], 1.316074),
    (["--name", "qf", "--matrix", "1,0;0,-1"], 0.0795775),
    (["--name", "z10", "--n", "2", "--m", "2", "--ratio", "1"], 0.0397887),
    (["--name", "hs", "--p", "2", "--a", "0", "--b", "0", "--n", "3", "--q", "6"], 0.42727),
    (["--name", "isocap", "--p", "2", "--a", "0", "--b", "0", "--n", "3"], 0.128278),
])
def test_constant_table(capsys, argv, value):
    code, out, _ = run_cli(["constant", *argv], capsys)
    assert code == 0
    assert json.loads(out)["results"]["constant"]["constant"]["value"] == pytest.approx(value, abs=1e-4)


def test_verify_elem(capsys):
    code, out, _ = run_cli(["verify", "--case", "INEQ-ELEM"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "pass"
    assert doc["results"]["elem_grid"]["equality_only_at_origin"]


def test_unknown_selector_rejected_before_computation(capsys, monkeypatch):
    def boom(*a, **k):
        raise AssertionError("computation started")

    monkeypatch.setattr(cli, "run_corpus", boom)
    monkeypatch.setattr(cli, "smallest_eigenvalue", boom)
    for argv in (["verify", "--case", "INEQ-NOPE"], ["eigen", "--problem", "nope"],
                 ["constant", "--name", "nope"], ["sharpness", "--case", "INEQ-ELEM"], ["frobnicate"]):
        code, _, err = run_cli(argv, capsys)
        assert code == 2, argv
        assert "error" in err


def test_runconfig_validate():
    with pytest.raises(cli.ConfigError):
        cli.RunConfig(command="verify", cases=["INEQ-NOPE"]).validate()
    with pytest.raises(cli.ConfigError):
        cli.RunConfig(command="eigen", eigen_tol=-1.0).validate()
    with pytest.raises(cli.ConfigError):
        cli.RunConfig(command="eigen", format="xml").validate()
    assert cli.RunConfig(command="verify", cases=["INEQ-X1"]).validate().cases == ["INEQ-X1"]


def test_domain_errors_are_config_errors(capsys):
    code, _, err = run_cli(["constant", "--name", "qf", "--matrix", "1,0;0,1"], capsys)
    assert code == 2 and "trace" in err
    code, _, err = run_cli(["constant", "--name", "hs_critical", "--p", "3", "--a", "0", "--b", "0", "--n", "3"],
                           capsys)
    assert code == 2
    code, _, err = run_cli(["constant", "--name", "hs_critical", "--p", "1"], capsys)
    assert code == 2 and "--a" in err


def test_threads_env(capsys):
    code, _, err = run_cli(["capacity", "--p", "2", "--n", "3"], capsys, {"SHARPCONST_THREADS": "zero"})
    assert code == 2 and "SHARPCONST_THREADS" in err
    code, out, _ = run_cli(["capacity", "--p", "2", "--n", "3"], capsys, {"SHARPCONST_THREADS": "3"})
    assert code == 0 and json.loads(out)["run"]["threads"] == 3


def test_verification_failure_exit_code(capsys, monkeypatch):
    bad = make_report("INEQ-X1", "f", Estimate(2.0, 0.0), Estimate(1.0, 0.0), 1.0, "closed_form")
    monkeypatch.setattr(cli, "run_corpus", lambda *a, **k: [bad])
    code, out, _ = run_cli(["verify", "--case", "INEQ-X1"], capsys)
    assert code == 1
    assert json.loads(out)["verdict"] == "fail"


def test_nonconvergence_exit_code(capsys, monkeypatch):
    def fail(*a, **k):
        raise ToleranceNotMetError("no", best_estimate=0.15, error_estimate=1e-3)

    monkeypatch.setattr(cli, "smallest_eigenvalue", fail)
    code, out, _ = run_cli(["eigen"], capsys)
    assert code == 3
    doc = json.loads(out)
    assert doc["error"]["kind"] == "ToleranceNotMetError"
    assert doc["error"]["best_estimate"] == 0.15


def test_reproducible_json(capsys):
    argv = ["verify", "--case", "INEQ-X1", "--case", "INEQ-60C"]
    _, first, _ = run_cli(argv, capsys)
    _, second, _ = run_cli(argv, capsys, {"SHARPCONST_THREADS": "4"})
    a, b = _strip_run(first), _strip_run(second)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_provenance_on_every_constant(capsys):
    for argv in (["verify", "--case", "INEQ-1U", "--case", "INEQ-QF"], ["eigen", "--problem", "corollary81"],
                 ["capacity", "--p", "2", "--n", "3", "--b", "0"]):
        _, out, _ = run_cli(argv, capsys)
        tagged = list(_tagged_values(json.loads(out)["results"]))
        assert tagged
        for path, node in tagged:
            assert node.get("provenance") in ("closed_form", "eigenvalue", "paper_value"), path


def test_csv_output(capsys):
    code, out, _ = run_cli(["verify", "--case", "INEQ-ELEM", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 6
    assert {r["verdict"] for r in rows} == {"pass"}
    assert rows[0]["section"] == "verify"


def test_output_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run_cli(["capacity", "--p", "2", "--n", "3", "--b", "0", "-o", str(target)], capsys)
    assert code == 0 and out == ""
    doc = json.loads(target.read_text())
    assert doc["results"]["capacity"]["isocap"]["verdict"] == "pass"


def test_sharpness_schedule(capsys):
    code, out, _ = run_cli(["sharpness", "--case", "INEQ-8X", "--schedule", "20,40"], capsys)
    assert code == 0
    sweep = json.loads(out)["results"]["sharpness"]["sweeps"][0]
    assert sweep["schedule"] == [20.0, 40.0]
    assert sweep["certified"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "sharpconst", "--version"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "sharpconst" in res.stdout
