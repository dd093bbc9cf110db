import json
import subprocess
import sys
from pathlib import Path

import pytest

from rvlab import cli

PARAMS = Path(__file__).resolve().parent.parent / "demos" / "params"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    records = [json.loads(line) for line in out.out.splitlines() if line.startswith("{")]
    return code, records, out


def results(records):
    return [r for r in records if r["record"] == "result"]


def test_finiteness_K(capsys):
    code, recs, _ = run(capsys, "finiteness", "K", PARAMS / "k_zero_n2.json")
    assert code == 0
    assert recs[0]["record"] == "run" and recs[0]["command"] == "finiteness"
    assert results(recs)[0]["details"]["finite"] is True


def test_finiteness_L_divergent(capsys):
    code, recs, _ = run(capsys, "finiteness", "L", PARAMS / "l_divergent_n2.json")
    assert code == 0
    assert results(recs)[0]["details"]["finite"] is False


def test_eval_K_both_methods(capsys):
    code, recs, out = run(capsys, "eval", "K", PARAMS / "k_zero_n2.json", "--points", 4096)
    assert code == 0
    assert all(r["status"] == "PASS" for r in results(recs))
    assert "PASS=" in out.out


def test_eval_L_series_is_input_error(capsys):
    code, _, out = run(capsys, "eval", "L", PARAMS / "beukers_N0.json", "--method", "series")
    assert code == 2
    assert "error:" in out.err


def test_wrong_keys_for_family(capsys):
    code, _, out = run(capsys, "eval", "K", PARAMS / "beukers_N0.json")
    assert code == 2


def test_length_mismatch_is_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 3, "a": [1, 1], "b": [1, 1, 1], "c": [0, 1]}))
    code, _, out = run(capsys, "finiteness", "L", bad)
    assert code == 2 and "length" in out.err


def test_missing_file(capsys):
    code, _, _ = run(capsys, "finiteness", "L", "/nonexistent.json")
    assert code == 2


def test_points_must_be_power_of_two(capsys):
    code, _, _ = run(capsys, "eval", "K", PARAMS / "k_zero_n2.json", "--points", 1000)
    assert code == 2


def test_group_E4(capsys):
    code, recs, _ = run(capsys, "group", "E", 4)
    assert code == 0
    by_name = {r["name"]: r for r in results(recs)}
    assert by_name["order"]["details"]["order"] == 72
    report = by_name["report"]["details"]
    assert set(report) >= {"family", "n", "order", "order_spectrum", "center", "isomorphic_to", "generators"}
    assert report["isomorphic_to"] == "S3S3_SEMI"


def test_group_wrong_model_fails(capsys):
    code, recs, _ = run(capsys, "group", "L", 3, "--model", "S5", "--checks", "isomorphism")
    assert code == 1
    assert results(recs)[0]["details"]["verdict"] == "NOT_ISOMORPHIC"


def test_theta_outside_E3_is_input_error(capsys):
    code, _, _ = run(capsys, "group", "E", 4, "--checks", "theta")
    assert code == 2


def test_orbit(capsys):
    code, recs, _ = run(capsys, "orbit", PARAMS / "e_ones_n2.json")
    assert code == 0
    rows = results(recs)
    assert 1 <= len(rows) <= 120


def test_json_out_and_csv(tmp_path, capsys):
    js, cs = tmp_path / "r.jsonl", tmp_path / "r.csv"
    code, recs, _ = run(capsys, "check", "beta", "--json-out", js, "--csv", cs)
    assert code == 0 and recs == []
    lines = js.read_text().splitlines()
    assert json.loads(lines[0])["record"] == "run"
    assert cs.read_text().startswith("name,status,details")


def test_check_output_is_reproducible(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"{i}.jsonl"
        assert run(capsys, "check", "involutions", "--json-out", path)[0] == 0
        lines = path.read_text().splitlines()
        header = json.loads(lines[0])
        header.pop("timestamp")
        outs.append((header, lines[1:]))
    assert outs[0] == outs[1]


def test_unknown_suite_rejected():
    with pytest.raises(SystemExit):
        cli.main(["check", "nope"])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rvlab", "finiteness", "K", str(PARAMS / "sorokin_N1.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert '"finite": true' in proc.stdout
