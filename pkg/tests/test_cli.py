import json
import subprocess
import sys
from fractions import Fraction

import pytest

from cyclic_formality.algebra import Polynomial, polynomial_to_json
from cyclic_formality.cli import CONVENTIONS, main
from cyclic_formality.dpoly import op_from_json
from cyclic_formality.formality.graphs import AdmissibleGraph
from cyclic_formality.tpoly import PolyVector, polyvector_to_json


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def pv_json(pv):
    return json.dumps(polyvector_to_json(pv))


@pytest.mark.parametrize("suite", ["algebra", "hochschild", "cyclic", "bicomplex", "hkr", "chainmap"])
def test_exact_suites_pass(capsys, suite):
    code, out, _ = run(capsys, "verify", "--suite", suite, "--trials", "3", "--seed", "1")
    report = json.loads(out)
    assert code == 0 and report["ok"]
    assert report["config"]["seed"] == 1
    assert report["conventions"] == CONVENTIONS


def test_verify_with_log_density(capsys):
    phi = json.dumps(polynomial_to_json(Polynomial.variable(3, 0) * Polynomial.variable(3, 1)))
    code, out, _ = run(capsys, "verify", "--suite", "chainmap", "--dim", "3", "--trials", "3",
                       "--log-density", phi)
    assert code == 0 and json.loads(out)["config"]["log_density"]["terms"]


def test_reports_are_byte_identical(capsys):
    args = ("verify", "--suite", "weights-n1", "--samples", "5000", "--seed", "4")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]
    args = ("verify", "--suite", "cyclic", "--trials", "2", "--seed", "4")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_timing_is_opt_in(capsys):
    _, out, _ = run(capsys, "verify", "--suite", "hochschild", "--trials", "1")
    assert "wall_time" not in json.loads(out)
    _, out, _ = run(capsys, "verify", "--suite", "hochschild", "--trials", "1", "--timing")
    assert "wall_time" in json.loads(out)


def test_hkr_cycl_examples(capsys):
    x = Polynomial.variable(1, 0)
    code, out, _ = run(capsys, "hkr-cycl", "--input", pv_json(PolyVector.vector_field([Polynomial.constant(1, 1)])))
    op = op_from_json(json.loads(out)["operators"]["1"])
    assert code == 0 and op.terms == {((0,), (1,)): 1}
    _, out, _ = run(capsys, "hkr-cycl", "--input", pv_json(PolyVector.vector_field([x])))
    op = op_from_json(json.loads(out)["operators"]["1"])
    assert op.terms == {((1,), (1,)): 1, ((0,), (0,)): Fraction(1, 2)}
    _, out, _ = run(capsys, "hkr-cycl", "--input", pv_json(PolyVector.vector_field([x])), "--u-power", "1")
    assert set(json.loads(out)["operators"]) == {"3"}


def test_hkr_cycl_reads_files(capsys, tmp_path):
    path = tmp_path / "xi.json"
    path.write_text(pv_json(PolyVector.vector_field([Polynomial.variable(2, 1), Polynomial.variable(2, 0)])))
    out_path = tmp_path / "out.json"
    code, out, _ = run(capsys, "hkr-cycl", "--input", str(path), "--out", str(out_path))
    assert code == 0 and out == ""
    assert "operators" in json.loads(out_path.read_text())


def test_weights_command(capsys):
    g = AdmissibleGraph(1, 3, ((1, -1),), ((1, 2),))
    code, out, _ = run(capsys, "weights", "--graph", json.dumps(g.to_json()), "--samples", "50000", "--seed", "3")
    report = json.loads(out)
    assert code == 0
    assert abs(report["value"] - 1 / 6) < 4 * report["std_error"]


def test_weights_degree_mismatch_is_usage_error(capsys):
    g = AdmissibleGraph(1, 3, ((1, -1),))
    code, _, err = run(capsys, "weights", "--graph", json.dumps(g.to_json()))
    assert code == 2 and "differs" in err


def test_star_command(capsys):
    code, out, _ = run(capsys, "star", "--poisson", pv_json(PolyVector.basis(2, (0, 1))),
                       "--order", "1", "--samples", "1000")
    report = json.loads(out)
    assert code == 0 and report["ok"]
    assert {c["name"] for c in report["checks"]} >= {"associativity order 1", "cyclicity order 1", "trace order 1"}


def test_star_rejects_divergence(capsys):
    pv = PolyVector.basis(2, (0, 1), Polynomial.variable(2, 0))
    code, out, _ = run(capsys, "star", "--poisson", pv_json(pv), "--order", "1")
    report = json.loads(out)
    assert code == 1 and not report["ok"]
    assert report["checks"][0]["counterexample"] == {"jacobi_ok": True, "div_free": False}


def test_star_unknown_check(capsys):
    code, _, err = run(capsys, "star", "--poisson", pv_json(PolyVector.basis(2, (0, 1))),
                       "--order", "1", "--checks", "nonsense")
    assert code == 2 and "nonsense" in err


def test_linf_command(capsys):
    pv = PolyVector.basis(2, (0, 1))
    code, out, _ = run(capsys, "linf", "--input", pv_json(pv), "--n", "2", "--m", "3",
                       "--samples", "20000", "--seed", "1")
    report = json.loads(out)
    assert code == 0 and report["ok"] and report["mode"] == "cyclic"
    code, out, _ = run(capsys, "linf", "--input", pv_json(pv), "--n", "1", "--m", "2")
    assert code == 0 and json.loads(out)["residual"] == []


@pytest.mark.parametrize("argv", [
    ["verify", "--suite", "nope"],
    ["verify"],
    ["verify", "--suite", "algebra", "--samples", "1"],
    ["verify", "--suite", "algebra", "--log-density", "{not json"],
    ["verify", "--suite", "algebra", "--dim", "2", "--log-density",
     json.dumps(polynomial_to_json(Polynomial.variable(3, 0)))],
    ["hkr-cycl", "--input", "{\"dim\": 2}"],
    ["weights", "--graph", "{\"n\": 1}"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    assert main(argv) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cyclic_formality", "verify", "--suite", "hochschild",
                           "--trials", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["ok"]
