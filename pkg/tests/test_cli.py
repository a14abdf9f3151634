import json
import subprocess
import sys

import pytest

from egalbudget.cli import main

KEYS = {"command", "inputs", "result", "exactness", "witnesses"}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    data = json.loads(out)
    assert set(data) == KEYS
    return code, data


@pytest.fixture
def gap4(tmp_path):
    path = tmp_path / "ufs_gap_4.json"
    path.write_text('{"m": 2, "agents": [[0], [0], [0], [1]]}')
    return path


@pytest.fixture
def half(tmp_path):
    path = tmp_path / "half_half.json"
    path.write_text("[0.5, 0.5]")
    return path


def test_eval_nash(capsys, gap4):
    code, out = run_json(capsys, "eval", "nash", gap4)
    assert code == 0
    assert out["result"]["distribution"] == [0.75, 0.25]
    assert out["result"]["welfare"] == 0.25
    assert out["result"]["normalized_welfare"] == 0.5


@pytest.mark.parametrize("rule", ["util", "cut", "nash", "egal", "pv", "es", "rp"])
def test_eval_every_rule(capsys, gap4, rule):
    code, out = run_json(capsys, "eval", rule, gap4)
    assert code == 0
    assert sum(out["result"]["distribution"]) == pytest.approx(1)


def test_check_cfs_fails_with_witness(capsys, gap4, half):
    code, out = run_json(capsys, "check", "cfs", gap4, half)
    assert code == 1
    assert out["result"]["holds"] is False
    assert out["witnesses"][0]["coalition"] == [0, 1, 2]


def test_check_holds(capsys, gap4, tmp_path):
    x = tmp_path / "x.json"
    x.write_text("[0.75, 0.25]")
    code, out = run_json(capsys, "check", "gfs", gap4, x)
    assert code == 0 and out["witnesses"] == []


def test_check_tolerance_flag(capsys, gap4, tmp_path):
    x = tmp_path / "x.json"
    x.write_text("[0.74, 0.26]")
    assert run(capsys, "check", "ifs", gap4, x)[0] == 0
    x.write_text("[0.8, 0.2]")
    assert run(capsys, "check", "ufs", gap4, x)[0] == 1
    assert run(capsys, "check", "ufs", gap4, x, "--tol", "0.1")[0] == 0


def test_pof(capsys, gap4):
    code, out = run_json(capsys, "pof", "ufs", gap4)
    assert code == 0 and out["result"]["ratio"] == 0.5
    code, out = run_json(capsys, "pof", "cfs", gap4)
    assert out["exactness"] == "lower-bound"


def test_bounds(capsys, gap4):
    code, out = run_json(capsys, "bounds", gap4)
    assert out["result"]["cover_number"] == 2 and out["result"]["upper"] == 0.5


def test_tables_rp_row(capsys):
    code, out = run_json(capsys, "tables", 5, "--which", 2)
    assert code == 0
    rows = {(r["rule"], r["family"]): r for r in out["result"]["rows"]}
    assert rows["rp", "ufs_gap"]["ratio"] == 0.4
    assert rows["util", "ufs_gap"]["ratio"] == 0
    assert rows["egal", "ufs_gap"]["ratio"] == 1
    assert rows["cut", "cut"]["ratio"] <= 0.5


def test_tables_one(capsys):
    code, out = run_json(capsys, "tables", 5)
    rows = {r["axiom"]: r for r in out["result"]["rows"]}
    assert rows["ufs"]["ufs_gap_pof"] == 0.4
    assert rows["ifs"]["ufs_gap_pof"] == 1.0
    assert 2 / 5 - 1 / 25 <= rows["imp"]["ufs_gap_pof"] <= 2 / 5
    assert out["result"]["gfs_witness_normalized_welfare"] == 0.2


def test_tsv(capsys):
    code, out = run(capsys, "tables", 4, "--which", 2, "--format", "tsv")
    lines = out.strip().splitlines()
    assert lines[0].split("\t")[:2] == ["rule", "family"]
    assert any(line.startswith("rp\tufs_gap\t") for line in lines)


def test_gen_then_eval_is_deterministic(capsys, tmp_path):
    path = tmp_path / "es.json"
    code, _ = run(capsys, "gen", "es", "--n", 3, "--k", 2, "-o", path)
    assert code == 0
    first = run(capsys, "eval", "nash", path)[1]
    second = run(capsys, "eval", "nash", path)[1]
    assert first == second
    assert json.loads(path.read_text())["m"] == 28


@pytest.mark.parametrize("content", ["", "{", '{"m": 2, "agents": [[3]]}', "[1, 2]", "\x00\x01"])
def test_malformed_instance_exit_2(capsys, tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    code, out = run_json(capsys, "eval", "nash", path)
    assert code == 2 and "error" in out["result"]


def test_missing_file_exit_2(capsys, tmp_path):
    code, out = run_json(capsys, "bounds", tmp_path / "missing.json")
    assert code == 2


@pytest.mark.parametrize("content", ["[0.5]", "[0.9, 0.9]", '"x"', "[-1, 2]"])
def test_malformed_distribution_exit_2(capsys, gap4, tmp_path, content):
    path = tmp_path / "x.json"
    path.write_text(content)
    assert run_json(capsys, "check", "ifs", gap4, path)[0] == 2


@pytest.mark.parametrize("argv", [[], ["nope"], ["eval", "borda", "x.json"], ["tables", "x"], ["check", "cfs"]])
def test_bad_argv_exit_2(capsys, argv):
    assert main(argv) == 2


@pytest.mark.parametrize("argv", [
    ["tables", "9"],
    ["tables", "8", "--which", "2"],
    ["gen", "es", "--n", "10", "--k", "9"],
])
def test_caps_exit_3(capsys, argv):
    code, out = run_json(capsys, *argv)
    assert code == 3


def test_rp_cap_flag(capsys, tmp_path):
    path = tmp_path / "big.json"
    path.write_text(json.dumps({"m": 2, "agents": [[0]] * 7 + [[1]]}))
    assert run_json(capsys, "eval", "rp", path)[0] == 3
    code, out = run_json(capsys, "eval", "rp", path, "--max-n-rp", 8)
    assert code == 0 and out["result"]["distribution"] == [0.875, 0.125]


def test_subset_cap_flag(capsys, tmp_path, half):
    path = tmp_path / "big.json"
    path.write_text(json.dumps({"m": 2, "agents": [[0], [1]] * 9}))
    assert run_json(capsys, "check", "cfs", path, half)[0] == 3
    assert run_json(capsys, "check", "cfs", path, half, "--max-n-subsets", 18)[0] == 0


def test_module_entry_point(gap4):
    proc = subprocess.run([sys.executable, "-m", "egalbudget", "eval", "egal", str(gap4)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["welfare"] == 0.5
