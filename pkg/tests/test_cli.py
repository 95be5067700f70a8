import json
from pathlib import Path

import pytest

from multijoint.cli import ConfigError, emit_report, main, parse_config, run_command

ROOT = Path(__file__).resolve().parent.parent
AXES = {"p": 3, "n": 3, "families": [
    {"k": 1, "planes": [{"base": [0, 0, 0], "directions": [[1, 0, 0]]}]},
    {"k": 1, "planes": [{"base": [0, 0, 0], "directions": [[0, 1, 0]]}]},
    {"k": 1, "planes": [{"base": [0, 0, 0], "directions": [[0, 0, 1]]}]}],
    "weights": "uniform", "lambda": [2]}


def codes(doc):
    with pytest.raises(ConfigError) as exc:
        parse_config(json.dumps(doc))
    return {c for c, _ in exc.value.violations}


def test_minimal_config_parses():
    rc = parse_config(json.dumps(AXES))
    assert rc.p == 3 and rc.lambdas == [2] and len(rc.families) == 3


def test_error_codes_are_distinct_and_collected():
    bad = dict(AXES, p=4, n=2, weights=[{"point": [0, 0, 0], "weight": "1/0"},
                                       {"point": [0, 0, 0], "weight": "-1/2"}])
    assert {"CFG_PRIME", "CFG_KSUM", "CFG_RAT", "CFG_NEG"} <= codes(bad)
    ksum = json.loads(json.dumps(AXES))
    ksum["families"][0] = {"k": 2, "planes": [{"base": [0, 0, 0], "directions": [[1, 0, 0], [0, 1, 0]]}]}
    assert codes(ksum) == {"CFG_KSUM"}
    assert codes(dict(AXES, weights=[{"point": [0, 0, 0], "weight": "1/0"}])) == {"CFG_RAT"}
    dep = json.loads(json.dumps(AXES))
    dep["families"][0]["planes"][0]["directions"] = [[0, 0, 0]]
    assert codes(dep) == {"CFG_PLANE"}
    with pytest.raises(ConfigError):
        parse_config("{not json")


def test_config_round_trip():
    for path in sorted((ROOT / "configs").glob("*.json")):
        rc = parse_config(path.read_text())
        assert parse_config(json.dumps(rc.to_json())) == rc
    rc = parse_config(json.dumps(dict(AXES, weights=[{"point": [0, 0, 0], "weight": "3/5"}])))
    assert parse_config(json.dumps(rc.to_json())) == rc


def test_detect_empty_families():
    doc = {"p": 3, "n": 2, "families": [{"k": 1, "planes": []}, {"k": 1, "planes": []}]}
    rep = run_command("detect", parse_config(json.dumps(doc)))
    assert rep.exit_code == 0 and rep.body["J"] == []


def test_certify_single_joint():
    rep = run_command("certify", parse_config(json.dumps(AXES)))
    assert rep.exit_code == 0
    entry = rep.body["certificates"][0]
    assert entry["corollary4"]["passed"] and entry["vanishing"]["passed"]


def test_certify_all_checks_with_random_handicaps():
    rc = parse_config((ROOT / "configs" / "two_joints.json").read_text())
    rc.lambdas = [2, 3]
    rep = run_command("certify", rc, checks=("corollary4", "vanishing", "sum_identity", "translation",
                                             "row_sums", "holder"), random_draws=3)
    assert rep.exit_code == 0 and len(rep.body["certificates"]) == 8


def test_oracle_single_point_support():
    rep = run_command("oracle", parse_config(json.dumps(AXES)))
    assert rep.exit_code == 0 and all(o["match"] for o in rep.body["oracle"])


def test_budget_exit_code():
    rc = parse_config((ROOT / "configs" / "two_joints.json").read_text())
    rc.budget = 0
    rc.lambdas = [4]
    assert run_command("factorize", rc).exit_code == 0  # early stop needs no moves
    rc.descent = "full"
    assert run_command("factorize", rc).exit_code == 2


def test_emit_formats():
    rc = parse_config((ROOT / "configs" / "two_joints.json").read_text())
    rc.lambdas = [4]
    rep = run_command("factorize", rc)
    out = emit_report(rep, "json")
    assert out == emit_report(run_command("factorize", rc), "json")
    doc = json.loads(out)
    assert {"0,0": "3/5", "1,0": "2/5"} == {r["point"]: r["s"] for r in doc["table"]
                                            if r["family"] == 0}
    assert b"0.6" not in out
    csv_lines = emit_report(rep, "csv").decode().splitlines()
    assert csv_lines[0] == "lambda,family,plane,point,count,s"
    assert '4,0,"0,0+<1,0>","0,0",3,3/5' in csv_lines
    assert json.loads(emit_report(None, "json")) == {}
    assert emit_report(None, "csv").decode().strip() == "lambda,family,plane,point,count,s"
    with pytest.raises(ValueError):
        emit_report(rep, "xml")


def test_main_end_to_end(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(AXES))
    assert main(["verify", "--config", str(cfg), "--lambda", "1,2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["verification"]["c_emp"] == "1/1" and doc["config"]["lambda"] == [1, 2]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(dict(AXES, n=4)))
    assert main(["detect", "--config", str(bad)]) == 1
    assert "CFG_KSUM" in capsys.readouterr().err
    assert main(["detect", "--config", str(tmp_path / "missing.json")]) == 1
    out = tmp_path / "r.json"
    assert main(["sweep", "--config", str(cfg), "--output", str(out), "--timing"]) == 0
    assert "timing_seconds" in json.loads(out.read_text())


def test_sweep_deterministic_across_workers(tmp_path):
    outs = []
    for w in (1, 2, 8):
        out = tmp_path / f"w{w}.json"
        main(["sweep", "--config", str(ROOT / "configs" / "two_joints.json"), "--workers", str(w),
              "--output", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
