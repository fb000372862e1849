import json

import pytest
import yaml

from solitonlab.cli import main, run
from solitonlab.scenario import ScenarioError, load_scenario, parse_scenario

from conftest import DESITTER, FIXTURES, MINKOWSKI, scenario_doc


def write(tmp_path, doc, name="s.scn"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(doc) if not isinstance(doc, str) else doc)
    return p


def test_desitter_fixture_loads_with_expanded_points():
    s = load_scenario(FIXTURES / "desitter.scn")
    assert len(s.points) == 18
    assert s.points[:2] == [[0, 0, 0, 0], [0.3, 1, -1, 0.5]]
    for p in s.points[2:]:
        assert -0.5 <= p[0] <= 0.5 and all(-2 <= c <= 2 for c in p[1:])


def test_schwarzschild_point_expressions():
    s = load_scenario(FIXTURES / "schwarzschild.scn")
    assert s.points[0][2] == pytest.approx(1.0471975511965976)
    assert not s.xi_declared


@pytest.mark.parametrize("doc,msg", [
    (scenario_doc(metric=[["-1", "x", "0", "0"], ["0", "1", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]],
                  points=[[0, 1, 0, 0]]), "symmetric"),
    (scenario_doc(metric=[["1", "0", "0", "0"], ["0", "1", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]]),
     "signature"),
    (scenario_doc(xi=["2", "0", "0", "0"]), "unit"),
    (scenario_doc(kappa=0), "kappa"),
    (scenario_doc(tolerance=-1), "tolerance"),
    (scenario_doc(points=[]), "at least one"),
    (scenario_doc(colour="red"), "unknown keys"),
    (scenario_doc(metric=[["-1", "0", "0", "0"], ["0", "1 +", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]]),
     "metric[1, 1]"),
    (scenario_doc(xi=["1", "0", "0", "q"]), "unknown identifier"),
    (scenario_doc(metric=[["-1", "0", "0", "0"], ["0", "log(x)", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]]),
     "point"),
])
def test_invalid_scenarios_exit_2(tmp_path, capsys, doc, msg):
    p = write(tmp_path, doc)
    with pytest.raises(ScenarioError, match=msg.replace("[", r"\[").replace("]", r"\]")):
        load_scenario(p)
    assert main(["validate", str(p)]) == 2
    assert "input error" in capsys.readouterr().err


def test_missing_file_and_bad_yaml(tmp_path):
    assert main(["report", str(tmp_path / "nope.scn")]) == 2
    assert main(["report", str(write(tmp_path, "metric: [1, 2\n"))]) == 2
    assert main(["report", str(write(tmp_path, "- just a list\n"))]) == 2


def test_bad_command_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["explode", str(FIXTURES / "desitter.scn")])
    assert info.value.code == 2


@pytest.mark.parametrize("fixture,command,code", [
    ("desitter", "report", 0),
    ("gaussian", "report", 0),
    ("schwarzschild", "report", 0),
    ("minkowski", "report", 1),
    ("minkowski", "torse", 1),
    ("minkowski", "validate", 0),
    ("desitter", "identities", 0),
    ("desitter", "classify", 0),
    ("desitter", "soliton", 0),
    ("desitter", "fluid", 0),
    ("schwarzschild", "curvature", 0),
])
def test_exit_codes(fixture, command, code, capsys):
    assert main([command, str(FIXTURES / f"{fixture}.scn")]) == code
    out = capsys.readouterr().out
    assert out.rstrip().splitlines()[-1].startswith("overall: " + ("PASS" if code == 0 else "FAIL"))


def test_json_and_out_are_identical_and_deterministic(tmp_path, capsys):
    f = str(FIXTURES / "desitter.scn")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["report", f, "--out", str(a), "--json"]) == 0
    printed = capsys.readouterr().out
    assert main(["report", f, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert printed == a.read_text()
    rep = json.loads(printed)
    assert rep["status"] == "pass"
    sol = rep["sections"]["soliton"]["xi"]
    assert sol["Lambda"] == -3.0 and sol["class"] == "shrinking" and sol["exact"] is False


def test_seed_and_tolerance_overrides(tmp_path):
    f = FIXTURES / "desitter.scn"
    base = load_scenario(f)
    other = load_scenario(f, seed=1)
    assert base.points[:2] == other.points[:2] and base.points[2:] != other.points[2:]
    assert base.digest != other.digest
    assert load_scenario(f, seed=20240611).digest == base.digest
    assert load_scenario(f, tolerance=1e-6).tolerance == 1e-6
    with pytest.raises(ScenarioError):
        load_scenario(f, tolerance=0.0)


def test_gaussian_report_content():
    rep = run("report", load_scenario(FIXTURES / "gaussian.scn"))
    pot = rep["sections"]["soliton"]["potential"]
    assert pot["Lambda"] == -1.0 and pot["Lambda_source"] == "given" and pot["exact"]
    assert rep["status"] == "pass"


def test_minkowski_negative_fixture_fails_on_torse_only():
    rep = run("report", load_scenario(FIXTURES / "minkowski.scn"))
    assert rep["failed"] == ["eq2.4"]


def test_forced_lambda_when_not_given():
    doc = scenario_doc(metric=DESITTER, xi=["1", "0", "0", "0"], potential=["1", "0", "0", "0"])
    rep = run("soliton", parse_scenario(doc))
    assert rep["sections"]["soliton"]["potential"]["Lambda_source"] == "forced"
    assert rep["sections"]["soliton"]["potential"]["Lambda"] == pytest.approx(-3.0)


def test_default_tolerance_and_coordinates():
    s = parse_scenario({"metric": MINKOWSKI, "lambda": 0, "kappa": 1, "points": [[0, 0, 0, 0]]})
    assert s.tolerance == 1e-8 and s.coordinates == ("t", "x", "y", "z")
