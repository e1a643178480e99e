import json
import subprocess
import sys

import pytest

from trivsys.cli import main
from trivsys.sysfile import SchemaError, dump_json, load_system_file, parse_system_dict


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write(path, data):
    path.write_text(json.dumps(data))
    return path


def catalog_file(capsys, tmp_path, name, *args):
    path = tmp_path / f"{name}.json"
    code, _, err = run(capsys, "catalog", *args, "-o", path)
    assert code == 0, err
    return path


def analyze_json(capsys, path, *extra):
    code, out, err = run(capsys, "analyze", path, "--json", *extra)
    return code, json.loads(out)


def test_catalog_writes_elliptic_file(capsys, tmp_path):
    path = catalog_file(capsys, tmp_path, "ell", "completely-flat", "--eps", "-1")
    data = json.loads(path.read_text())
    assert data["f"] == ["cos(w)", "sin(w)", "0"]
    assert data["g"] == [["0", "0", "1"]]
    assert data["expected"]["epsilon"] == -1


def test_analyze_elliptic(capsys, tmp_path):
    path = catalog_file(capsys, tmp_path, "ell", "completely-flat", "--eps", "-1")
    code, rep = analyze_json(capsys, path)
    assert code == 0
    assert rep["family"] == "completely-flat"
    assert rep["trivialisable"]["verdict"] == "yes"
    assert rep["invariants"]["epsilon"] == -1
    assert all(t["verdict"] == "pass" for t in rep["relations"].values())


def test_analyze_flat_constant_is_not_trivialisable(capsys, tmp_path):
    path = catalog_file(capsys, tmp_path, "fc", "flat-constant", "--eps", "-1", "--kappa", "1")
    code, rep = analyze_json(capsys, path)
    assert code == 0
    assert rep["trivialisable"]["verdict"] == "no"
    assert rep["family"] == "flat-constant"
    assert rep["witnesses"]["trivialisable: kappa"]["value"] == pytest.approx(1.0)


def test_vanishing_control_exits_with_assumption_code(capsys, tmp_path):
    path = write(tmp_path / "g0.json", {"vars": ["x", "y", "w"], "f": ["1", "0", "0"],
                                        "g": [["0", "0", "0"]], "base": [0, 0, 0]})
    code, rep = analyze_json(capsys, path)
    assert code == 2
    assert rep["status"] == "assumptions-failed"
    assert rep["assumptions"]["A1"]["verdict"] == "fail"


def test_centro_flat_constant_real_exponential_subcase(capsys, tmp_path):
    path = catalog_file(capsys, tmp_path, "cfc", "centro-flat-constant", "--eps", "-1", "--nu", "3")
    data = json.loads(path.read_text())
    assert data["meta"]["params"]["subcase"] == "b"
    code, rep = analyze_json(capsys, path)
    assert code == 0
    assert abs(rep["invariants"]["nu"]["value_at_base"]) == pytest.approx(3.0)


def test_integrality_violation_is_an_error(capsys):
    code, _, err = run(capsys, "catalog", "sigma-lambda-0k", "--k", "2", "--lambda", "1,1/2")
    assert code == 1
    assert "must be an integer >= k = 2" in err


def test_identity_feedback_keeps_components(capsys, tmp_path):
    path = catalog_file(capsys, tmp_path, "ell", "completely-flat", "--eps", "-1")
    out = tmp_path / "same.json"
    assert run(capsys, "transform", path, "--alpha", "0", "--beta", "1", "-o", out)[0] == 0
    before, after = json.loads(path.read_text()), json.loads(out.read_text())
    assert (before["f"], before["g"], before["base"]) == (after["f"], after["g"], after["base"])
    assert "expected" not in after


def test_constant_feedback_scales_lambda1(capsys, tmp_path):
    path = catalog_file(capsys, tmp_path, "ell", "completely-flat", "--eps", "-1")
    out = tmp_path / "scaled.json"
    assert run(capsys, "transform", path, "--beta", "2", "-o", out)[0] == 0
    _, before = analyze_json(capsys, path)
    _, after = analyze_json(capsys, out)
    assert after["structure_functions"]["lam1"]["value_at_base"] == pytest.approx(-4.0)
    assert after["invariants"]["epsilon"] == before["invariants"]["epsilon"]
    assert after["invariants"]["kappa"]["value_at_base"] == pytest.approx(0.0, abs=1e-12)
    assert after["family"] == before["family"]


def test_reflection_flips_nu(capsys, tmp_path):
    path = catalog_file(capsys, tmp_path, "t2", "T2", "--eps", "-1", "--nu", "w")
    out = tmp_path / "reflected.json"
    assert run(capsys, "transform", path, "--diffeo", "x,y,-w", "x,y,-w", "-o", out)[0] == 0
    _, before = analyze_json(capsys, path)
    _, after = analyze_json(capsys, out)
    assert before["invariants"]["nu"]["expr"] == "w"
    assert after["invariants"]["nu"]["expr"] == "-w"
    assert before["invariants"]["nu_sign"] == -after["invariants"]["nu_sign"]
    assert after["family"] == before["family"] == "flat"


def test_bad_inverse_is_an_error(capsys, tmp_path):
    path = catalog_file(capsys, tmp_path, "ell", "completely-flat")
    code, _, err = run(capsys, "transform", path, "--diffeo", "x+y,y,w", "x+y,y,w")
    assert code == 1 and "inverse" in err


def test_verify_passes_and_detects_edits(capsys, tmp_path):
    path = catalog_file(capsys, tmp_path, "t2", "T2", "--eps", "-1", "--nu", "w")
    code, out, _ = run(capsys, "verify", path)
    assert code == 0 and "FAIL" not in out
    data = json.loads(path.read_text())
    data["expected"]["nu"] = "w + 1"
    data["expected"]["trivialisable"] = "no"
    bad = write(tmp_path / "bad.json", data)
    code, out, _ = run(capsys, "verify", bad, "--json")
    rep = json.loads(out)
    assert code == 4
    assert not rep["checks"]["nu"]["pass"] and rep["checks"]["nu"]["witness"] is not None
    assert rep["checks"]["trivialisable"] == {"pass": False, "expected": "no", "got": "yes"}


def test_verify_without_expected_block_is_an_error(capsys, tmp_path):
    path = write(tmp_path / "plain.json", {"vars": ["x", "y", "w"], "f": ["cos(w)", "sin(w)", "0"],
                                           "g": [["0", "0", "1"]], "base": [0, 0, 0]})
    assert run(capsys, "verify", path)[0] == 1


@pytest.mark.parametrize("suite", ["calculus", "symmetry"])
def test_verify_suite(capsys, suite):
    code, out, _ = run(capsys, "verify", "--suite", suite)
    assert code == 0 and out.startswith(f"PASS {suite}")


def test_symmetry_command(capsys, tmp_path):
    path = catalog_file(capsys, tmp_path, "ell", "completely-flat", "--eps", "-1")
    code, out, _ = run(capsys, "symmetry", path, "--field", "1,0,0", "--field", "0,1,0", "--abelian", "--json")
    rep = json.loads(out)
    assert code == 0
    assert [v["verdict"] for v in rep["candidates"].values()] == ["yes", "yes"]
    assert rep["abelian_trivialisation"]["verdict"] == "yes"


def test_symmetry_rank_condition(capsys, tmp_path):
    yes = write(tmp_path / "yes.json", {"vars": ["x1", "x2", "w"], "f": ["w", "w^2", "0"],
                                        "g": [["0", "0", "1"]], "base": [0, 0, 0.3]})
    no = write(tmp_path / "no.json", {"vars": ["x1", "x2", "w"], "f": ["w", "x1", "0"],
                                      "g": [["0", "0", "1"]], "base": [0, 0, 0.3]})
    assert json.loads(run(capsys, "symmetry", yes, "--rank-condition", "--json")[1])["rank_condition"]["verdict"] == "yes"
    assert json.loads(run(capsys, "symmetry", no, "--rank-condition", "--json")[1])["rank_condition"]["verdict"] == "no"
    wrong = write(tmp_path / "wrong.json", {"vars": ["x1", "x2", "w"], "f": ["w", "x1", "1"],
                                            "g": [["0", "0", "1"]], "base": [0, 0, 0.3]})
    assert run(capsys, "symmetry", wrong, "--rank-condition")[0] == 1


def test_symmetry_of_catalog_presentation(capsys):
    code, out, _ = run(capsys, "symmetry", "--family", "sigma-lambda-0k", "--set", "k=2", "--set", "lambda=1,3/2",
                       "--abelian", "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["presentation"]["verdict"] == "yes"
    assert rep["presentation"]["eigenvalues"] == ["1", "3/2"]


def test_other_shapes_report_distribution_ranks(capsys, tmp_path):
    path = write(tmp_path / "four.json", {"vars": ["x1", "x2", "w1", "w2"], "f": ["w1", "w2", "0", "0"],
                                          "g": [["0", "0", "1", "0"], ["0", "0", "0", "1"]], "base": [0, 0, 0, 0]})
    code, rep = analyze_json(capsys, path)
    assert code == 0
    assert rep["shape"] == {"n": 4, "m": 2}
    assert rep["distributions"]["rank G1"] == 4


def test_analyze_is_deterministic(capsys, tmp_path):
    path = catalog_file(capsys, tmp_path, "fc", "flat-constant", "--eps", "1", "--kappa", "1")
    outputs = [run(capsys, "analyze", path, "--json", "--seed", "7")[1] for _ in range(2)]
    assert outputs[0] == outputs[1]
    assert outputs[0] != run(capsys, "analyze", path, "--json", "--seed", "8")[1]


def test_global_flags_reach_the_plan(capsys, tmp_path):
    path = catalog_file(capsys, tmp_path, "ell", "completely-flat")
    code, rep = analyze_json(capsys, path, "--samples", "16", "--box", "0.25", "--tol", "1e-7")
    assert rep["plan"]["samples"] == 16 and rep["plan"]["half_width"] == 0.25 and rep["plan"]["abs_tol"] == 1e-7


@pytest.mark.parametrize(
    "data, fragment",
    [
        ({"vars": ["x"], "f": ["1"], "g": [["0"]]}, "missing required key 'base'"),
        ({"vars": ["x"], "f": ["1"], "g": [["1"]], "base": [0], "color": 1}, "unknown keys"),
        ({"vars": ["x"], "f": ["1", "2"], "g": [["1"]], "base": [0]}, "'f' must list 1"),
        ({"vars": ["x"], "f": ["1"], "g": [["1"]], "base": [0], "plan": {"speed": 1}}, "unknown plan keys"),
        ({"vars": ["x"], "f": ["1"], "g": [["1"]], "base": [0], "plan": {"samples": 0}}, "invalid plan"),
        ({"vars": ["x"], "f": ["1"], "g": [["1"]], "base": [0], "expected": {"epsilon": 2}}, "epsilon"),
    ],
)
def test_schema_errors(data, fragment):
    with pytest.raises(SchemaError, match=fragment):
        parse_system_dict(data)


def test_malformed_files_exit_with_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "analyze", bad)
    assert code == 1 and "not valid JSON" in err
    parse = write(tmp_path / "parse.json", {"vars": ["x", "y", "w"], "f": ["cos(z)", "0", "0"],
                                            "g": [["0", "0", "1"]], "base": [0, 0, 0]})
    code, _, err = run(capsys, "analyze", parse)
    assert code == 1 and "unknown identifier 'z'" in err
    assert run(capsys, "analyze", tmp_path / "missing.json")[0] == 1


def test_plan_in_file_is_honoured(tmp_path):
    path = write(tmp_path / "p.json", {"vars": ["x", "y", "w"], "f": ["cos(w)", "sin(w)", "0"],
                                       "g": [["0", "0", "1"]], "base": [0, 0, 0], "plan": {"samples": 12}})
    sf = load_system_file(path)
    assert sf.plan().samples == 12 and sf.plan(samples=20).samples == 20


def test_dump_json_is_strict_and_sorted():
    assert dump_json({"b": float("nan"), "a": [1.5, float("inf")]}) == '{\n  "a": [\n    1.5,\n    null\n  ],\n  "b": null\n}\n'


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "trivsys", "catalog", "completely-flat"], capture_output=True, text=True)
    assert done.returncode == 0
    assert json.loads(done.stdout)["f"] == ["cos(w)", "sin(w)", "0"]
