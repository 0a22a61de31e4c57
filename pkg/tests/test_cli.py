import json
import subprocess
import sys

import pytest

from curvlab.cli import main, parse_params, to_markdown


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _strip(text):
    data = json.loads(text)
    data.pop("timestamp")
    return data


def test_parse_params():
    assert parse_params(["n=4", "r=1.5"]) == {"n": 4, "r": 1.5}
    assert parse_params(["p=2,a=1,q=2,b=1"]) == {"p": 2, "a": 1, "q": 2, "b": 1}
    assert parse_params(["n=4,f=exp(x1,x2)"])["f"] == "exp(x1,x2)"


def test_check_sphere_all(capsys):
    code, out, _ = _run(["check", "--metric", "zoo:sphere", "--param", "n=4", "--param", "r=1", "--all"], capsys)
    assert code == 0
    report = _strip(out)
    assert set(report) >= {"version", "config", "checks"}
    verdicts = {c["name"]: c["verdict"] for c in report["checks"]}
    assert all(v in ("pass", "holds everywhere on sample") for v in verdicts.values())
    for c in report["checks"]:
        assert set(c) >= {"name", "metric", "verdict", "residual_or_margin", "tolerance", "points", "worst_point"}


def test_check_expected_failure_fixture(capsys):
    argv = ["check", "--metric", "zoo:product_spheres", "--param", "p=2,a=1,q=2,b=1", "--check", "pinch_thm11"]
    code, out, _ = _run(argv, capsys)
    assert code == 0
    assert _strip(out)["checks"][0]["verdict"] == "fails at all sampled points"


def test_unknown_check_rejected(capsys):
    code, out, err = _run(["check", "--metric", "zoo:sphere", "--check", "nope"], capsys)
    assert code == 2 and out == ""
    assert "unknown check" in err


def test_failing_check_exit_status(capsys):
    argv = ["check", "--metric", "zoo:perturbation", "--param", "n=4,seed=1", "--check", "symmetry_catalog",
            "--tol", "bach_forms=1e-40", "--samples", "3"]
    code, out, _ = _run(argv, capsys)
    assert code == 1
    assert _strip(out)["checks"][0]["verdict"] == "fail"


def test_deterministic_json(capsys, tmp_path):
    argv = ["check", "--metric", "zoo:product_spheres", "--param", "p=2,a=1,q=2,b=2", "--all", "--seed", "5",
            "--samples", "6"]
    a = _strip(_run(argv, capsys)[1])
    b = _strip(_run(argv, capsys)[1])
    assert json.dumps(a) == json.dumps(b)


def test_threads_env_gives_same_report(capsys, monkeypatch):
    argv = ["check", "--metric", "zoo:perturbation", "--param", "n=4,seed=3", "--all", "--samples", "70"]
    a = _strip(_run(argv, capsys)[1])
    monkeypatch.setenv("CURVLAB_THREADS", "3")
    b = _strip(_run(argv, capsys)[1])
    assert json.dumps(a) == json.dumps(b)


def test_constants_table(capsys):
    code, out, _ = _run(["constants", "--n", "4", "--n", "5"], capsys)
    assert code == 0
    rows = _strip(out)["results"]
    assert rows["n=4"]["C_n"] == pytest.approx(0.6123724, abs=5e-8)
    assert rows["n=4"]["E_n"] == pytest.approx(2.4494897, abs=5e-8)
    assert rows["n=5"]["E_n"] is None


def test_markdown_from_json(capsys):
    code, out, _ = _run(["constants", "--n", "4", "--format", "markdown"], capsys)
    assert code == 0
    assert out.startswith("# curvlab constants report")
    assert "0.6123724357" in out
    report = {"version": "x", "command": "c", "config": {}, "checks": [], "results": {"a": 1.5}}
    assert "- a: 1.5" in to_markdown(report)


def test_integrate_and_sobolev(capsys):
    code, out, _ = _run(["integrate", "--metric", "zoo:sphere", "--param", "n=4,r=1", "--field", "one",
                         "--resolution", "8"], capsys)
    assert code == 0
    assert _strip(out)["results"]["integral[one]"]["value"] == pytest.approx(26.3189451, rel=1e-6)
    code, out, _ = _run(["sobolev", "--metric", "zoo:product_spheres", "--param", "p=2,a=1,q=2,b=1",
                         "--u", "1", "--pinching", "--resolution", "8"], capsys)
    assert code == 0
    rep = _strip(out)
    assert rep["results"]["quotient[1]"]["value"] == pytest.approx(8.37758, rel=1e-5)
    assert rep["checks"][0]["verdict"] == "condition-fails"


def test_integrate_noncompact_is_error(capsys):
    code, _, err = _run(["integrate", "--metric", "zoo:hyperbolic", "--param", "n=4", "--field", "one"], capsys)
    assert code == 2 and "compact" in err


def test_export_and_reload(capsys, tmp_path):
    code, out, _ = _run(["export-zoo", str(tmp_path / "zoo")], capsys)
    assert code == 0
    files = _strip(out)["results"]["files"]
    assert set(files) == {"euclidean", "sphere", "hyperbolic", "product_spheres", "conformal", "perturbation"}
    code, out, _ = _run(["check", "--metric", files["sphere"], "--check", "oracle", "--samples", "4"], capsys)
    assert code == 0
    assert _strip(out)["checks"][0]["verdict"] == "pass"


def test_bad_metric_file(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = _run(["check", "--metric", str(p), "--check", "oracle"], capsys)
    assert code == 2
    code, _, err = _run(["check", "--metric", str(tmp_path / "missing.json"), "--check", "oracle"], capsys)
    assert code == 2 and "cannot read" in err


def test_output_file(capsys, tmp_path):
    out = tmp_path / "r.md"
    code, stdout, _ = _run(["constants", "--n", "6", "--format", "markdown", "--output", str(out)], capsys)
    assert code == 0 and stdout == ""
    assert "n=6" in out.read_text()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "curvlab", "constants", "--n", "4"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["n=4"]["C_n"] == pytest.approx(0.6123724, abs=5e-8)
