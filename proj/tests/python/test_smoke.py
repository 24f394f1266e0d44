import json
import math
from pathlib import Path

import pytest

import pfaffopt

ROOT = Path(__file__).resolve().parents[2]
CORPUS = ROOT / "corpus"
DOCS = ROOT / "docs"

jsonschema = pytest.importorskip("jsonschema")


def validator(name):
    schema = json.loads((DOCS / name).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


HALFPLANE = {
    "name": "halfplane",
    "variables": ["x", "y"],
    "objective": "x^2 + y^2",
    "constraints": [{"expr": "x + y", "relation": ">=", "constant": 1}],
    "options": {"lambda_grid": [{"from": 0, "to": 3, "count": 31}]},
}


def test_solve_from_dict():
    r = pfaffopt.solve(HALFPLANE)
    assert r["command"] == "solve"
    assert r["primal_value"] == pytest.approx(0.5, abs=1e-10)
    assert r["optimum"]["x"] == pytest.approx([0.5, 0.5], abs=1e-10)


def test_solve_from_path_matches_cli_fields():
    r = pfaffopt.solve(CORPUS / "sec341_ex1.json", mu=[[3.0]])
    (pt,) = r["solutions"][0]["points"]
    assert pt["x"] == pytest.approx([0, 0, -1.5], abs=1e-10)
    assert pt["objective"] == pytest.approx(2.25, abs=1e-10)
    assert pt["riemann"]["identity_ok"]


def test_dual_and_csv():
    r = pfaffopt.dual(HALFPLANE, kind="psi")
    assert r["optimum"]["value"] == pytest.approx(0.5, abs=1e-10)
    assert r["optimum"]["argument"] == pytest.approx([1.0], abs=1e-8)
    csv = pfaffopt.to_csv(r)
    assert csv.splitlines()[0].startswith("multiplier1,value,flag")
    assert len(csv.splitlines()) == 32


def test_theta_dual():
    r = pfaffopt.dual(CORPUS / "sec341_ex1.json", kind="theta")
    for s in r["samples"]:
        mu = s["multipliers"][0]
        assert s["value"] == pytest.approx(-mu * mu / 4 + mu, abs=1e-6)
    assert abs(r["anchor_slope"]) <= 1e-6


def test_sweep_and_frobenius():
    r = pfaffopt.sweep(CORPUS / "sec421.json", range="-1:1:5")
    assert [row["objective"] for row in r["rows"]] == pytest.approx([0.5, 1.25, 1.5, 1.25, 0.5], abs=1e-10)
    f = pfaffopt.frobenius(CORPUS / "frobenius_contact.json")
    assert f["forms"][0]["integrable"] is False


def test_determinism():
    a = pfaffopt.solve(CORPUS / "sec37_2.json", seed=5)
    b = pfaffopt.solve(CORPUS / "sec37_2.json", seed=5)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_expression():
    e = pfaffopt.Expression("x^2 * sin(y)", ["x", "y"])
    assert e.eval([2.0, math.pi / 2]) == pytest.approx(4.0)
    gx, gy = e.gradient()
    assert pfaffopt.Expression(gx, ["x", "y"]).eval([2.0, math.pi / 2]) == pytest.approx(4.0)
    assert pfaffopt.Expression(gy, ["x", "y"]).eval([2.0, 0.0]) == pytest.approx(4.0)


def test_errors():
    bad = dict(HALFPLANE, objective="x + w")
    with pytest.raises(pfaffopt.InputError, match="offset 4"):
        pfaffopt.solve(bad)
    with pytest.raises(ValueError):
        pfaffopt.validate(dict(HALFPLANE, colour="red"))
    with pytest.raises(pfaffopt.SingularPathError):
        pfaffopt.dual(CORPUS / "sec341_ex1.json", kind="theta", grid=["-1:1:5"])
    with pytest.raises(pfaffopt.InputError):
        pfaffopt.solve(dict(HALFPLANE, objective="abs(x)"))


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.json")), ids=lambda p: p.stem)
def test_corpus_files_match_schema(path):
    doc = json.loads(path.read_text())
    errors = [e.message for e in validator("problem.schema.json").iter_errors(doc)]
    assert errors == []
    assert pfaffopt.validate(doc)[0] == doc["name"]


def test_reports_match_schema():
    v = validator("report.schema.json")
    reports = [
        pfaffopt.solve(HALFPLANE),
        pfaffopt.dual(HALFPLANE),
        pfaffopt.solve(CORPUS / "sec37_2.json"),
        pfaffopt.dual(CORPUS / "sec37_2.json", kind="wolfe"),
        pfaffopt.dual(CORPUS / "sec16.json", kind="wolfe"),
        pfaffopt.dual(CORPUS / "sec14_2.json", kind="ec"),
        pfaffopt.sweep(CORPUS / "sec341_ex2.json"),
        pfaffopt.frobenius(CORPUS / "frobenius_exact.json"),
        pfaffopt.verify(CORPUS, properties=False),
    ]
    for r in reports:
        assert [e.message for e in v.iter_errors(r)] == []


def test_verify_summary():
    r = pfaffopt.verify(CORPUS, properties=False)
    assert set(r["criteria"]) == {str(c) for c in range(1, 14)}
    assert r["criteria"]["1"] == "PASS"
