import json
import math
import pathlib

import pytest

import dynbc

PRESETS = pathlib.Path(__file__).resolve().parents[2] / "presets"


def test_expressions():
    e = dynbc.parse("sin(x)*p^2")
    assert str(e.diff("p")) == "sin(x)*(2*p)"
    assert e.eval(x=0.3, p=2.0) == pytest.approx(4 * math.sin(0.3))
    assert e.depends_on("x") and not e.depends_on("t")
    with pytest.raises(dynbc.SyntaxError):
        dynbc.parse("1 + * 2")
    with pytest.raises(dynbc.DomainError):
        dynbc.parse("log(z)").eval(z=-1.0)


def test_barrier_closed_forms():
    assert dynbc.find_q1("1", 1.0, 2.0) == pytest.approx(3.0, rel=1e-12)
    b = dynbc.build_barrier("1", 1.0, 2.0)
    assert b["kappa0"] == pytest.approx(2.0, rel=1e-10)
    assert b["h"][0] == 0.0
    assert b["h"][-1] == pytest.approx(4.0, rel=1e-8)
    with pytest.raises(dynbc.ConditionViolated):
        dynbc.find_q1("(1+p^2)^1.5", 1e-9, 1.0)
    with pytest.raises(dynbc.PreconditionFailed):
        dynbc.build_barrier("1", 1.0, 2.0, K=2.0)


def test_sup_bound():
    s = dynbc.sup_bound("1", 1.0, 0.5, 1.0)
    assert s["M_paper"] == pytest.approx(0.5, abs=1e-6)
    assert s["M_proof"] == pytest.approx(3.0, rel=1e-8)


def test_solve_and_hypotheses():
    spec = json.loads((PRESETS / "steady.json").read_text())
    sol = dynbc.solve(spec)
    assert sol["status"] == "Completed"
    dev = max(abs(u - x) for row in sol["u"] for u, x in zip(row, sol["nodes"]))
    assert dev <= 1e-10
    assert dynbc.check_compatibility(spec) == (0.0, 0.0)
    report = {e["name"]: e for e in dynbc.check_hypotheses(spec, 1.0, 1.5, "1")}
    assert all(e["satisfied"] for e in report.values())

    bad = dict(spec, u0="x^2")
    minus, plus = dynbc.check_compatibility(bad)
    assert max(minus, plus) > 1.0

    blow = dynbc.solve(PRESETS / "blowup-270.json", nx=101, cutoff=50.0)
    assert blow["status"] == "BlowUpDetected"


def test_cli(tmp_path):
    rc = dynbc.run_cli("certify", "--spec", PRESETS / "constant-psi.json", "--out", tmp_path)
    assert rc == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["barrier"]["q1"] == pytest.approx(3.0)
    assert dynbc.run_cli("sweep", "--spec", PRESETS / "steady.json", "--out", tmp_path) == 1
    with pytest.raises(dynbc.InputError):
        dynbc.solve({"elll": 1})
