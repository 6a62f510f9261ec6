import json
import subprocess
import sys

import pytest

from urysohn_forge.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def space_file(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"points": ["a", "b"], "dist": [["0", "2"], ["2", "0"]]}))
    return str(p)


def test_validate(capsys, space_file, tmp_path):
    code, out, _ = call(capsys, "validate", space_file)
    assert code == 0 and json.loads(out)["ok"] is True
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dist": [[0, 1, 3], [1, 0, 1], [3, 1, 0]]}))
    code, out, err = call(capsys, "validate", str(bad))
    assert code == 2 and json.loads(out)["triangles"]
    assert json.loads(err)["code"]


def test_extend_by_name_and_id(capsys, space_file):
    code, out, _ = call(capsys, "extend", space_file, "--spec", '{"a": "1", "1": "3"}', "--name", "z")
    doc = json.loads(out)
    assert code == 0 and doc["points"] == ["a", "b", "z"] and doc["dist"][2] == ["1", "3", "0"]
    assert doc["new"] == 2 and doc["log"][-1]["new"] == 2


def test_extend_domain_error(capsys, space_file):
    code, _, err = call(capsys, "extend", space_file, "--spec", '{"a": 1, "b": 4}')
    e = json.loads(err)
    assert code == 2 and e["code"] == "extension" and e["context"]["violations"]


@pytest.mark.parametrize(
    "argv",
    [
        ["extend", "missing.json", "--spec", "{}"],
        ["generic", "--n", "0"],
        ["generic", "--n", "3", "--domain", "real"],
        ["toeplitz", "validate", "--f", "1.5"],
        ["toeplitz", "validate", "--f", "1/0"],
        ["orbit", "partition", "--cover", "2", "--format", "dot"],
        ["oracle", "nope"],
        ["oracle", "metric", "--stages", "2"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_1(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == 1
    assert json.loads(err)["code"] in ("usage", "parse")


def test_generic_same_seed_same_bytes(capsys):
    a = call(capsys, "generic", "--n", "8", "--domain", "rat:3:2", "--seed", "5")[1]
    b = call(capsys, "--seed", "5", "generic", "--n", "8", "--domain", "rat:3:2")[1]
    c = call(capsys, "generic", "--n", "8", "--domain", "rat:3:2", "--seed", "6")[1]
    assert a == b and a != c


def test_generic_csv(capsys):
    code, out, _ = call(capsys, "generic", "--n", "2", "--domain", "int:1", "--format", "csv")
    assert code == 0 and out == ",0,1\n0,0,1\n1,1,0\n"


def test_out_file(capsys, tmp_path):
    target = tmp_path / "o.json"
    code, out, _ = call(capsys, "toeplitz", "validate", "--f", "3,5", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text()) == {"ok": True, "violations": []}


def test_toeplitz_commands(capsys):
    code, out, err = call(capsys, "toeplitz", "validate", "--f", "1,3")
    assert code == 2 and json.loads(out)["violations"] == [{"i": 1, "j": 1, "side": "upper"}]
    assert json.loads(call(capsys, "toeplitz", "extend", "--f", "3,5", "--h", "3,3")[1]) == {"g1": 3, "gN": 3, "d": 5}
    code, _, err = call(capsys, "toeplitz", "extend", "--f", "3,5", "--h", "3,3", "--clamp", "9,9")
    assert code == 2 and json.loads(err)["code"] == "infeasible"
    doc = json.loads(call(capsys, "toeplitz", "prolong", "--f", "3,5", "--h", "3,3")[1])
    assert doc["values"][:2] == ["3", "5"] and doc["values"][-2:] == ["3", "3"] and doc["mode"] == "int"
    doc = json.loads(call(capsys, "toeplitz", "universal", "--steps", "5")[1])
    assert len(doc["table"]) == 5
    doc = json.loads(call(capsys, "toeplitz", "cyclic", "--f", "1,2", "--size", "2")[1])
    assert doc["dist"] == [["0", "1", "2"], ["1", "0", "1"], ["2", "1", "0"]]


def test_iso_commands(capsys):
    code, out, _ = call(capsys, "iso", "unbounded", "--stages", "10")
    lines = [json.loads(x) for x in out.splitlines()]
    assert code == 0 and [x["stage"] for x in lines] == [6, 10]
    code, out, _ = call(capsys, "iso", "free", "--words", "a,abAB", "--revisits", "1", "--format", "csv")
    assert code == 0 and out.splitlines()[0].startswith("kind,stage,word")
    code, out, _ = call(capsys, "iso", "bounded", "--n", "5", "--pairs", "0:0", "--bound", "1", "--steps", "4")
    assert code == 0 and json.loads(out)["problems"] == []
    code, _, err = call(capsys, "iso", "bounded", "--n", "4", "--pairs", "0:99", "--bound", "1")
    assert code == 2 and json.loads(err)["context"]["points"] == [99]
    code, out, _ = call(capsys, "iso", "dense-free", "--n", "5", "--words", "2")
    kinds = [json.loads(x)["kind"] for x in out.splitlines()]
    assert code == 0 and kinds.count("freeness") == 2 and "homogeneity" in kinds


def test_group2_commands(capsys):
    doc = json.loads(call(capsys, "group2", "extend", "--delta", "2", "--new", "1,2")[1])
    assert doc["delta"] == {"01": "2", "10": "1", "11": "2"}
    code, _, err = call(capsys, "group2", "extend", "--delta", "2", "--new", "1,4")
    assert code == 2 and json.loads(err)["code"] == "extension"
    doc = json.loads(call(capsys, "group2", "expo3", "--alpha", "6", "--eps", "1/2")[1])
    assert doc["forced"] is True and doc["violation_at_least"] == "3/2"
    doc = json.loads(call(capsys, "group2", "generic", "--levels", "2")[1])
    assert doc["level"] == 2 and "stats" in doc


def test_orbit_commands(capsys):
    doc = json.loads(call(capsys, "orbit", "partition", "--cover", "2")[1])
    assert doc["breakpoints"] == ["0", "1", "3/2", "11/6", "25/12"]
    code, out, _ = call(capsys, "orbit", "graph", "--n", "4", "--format", "dot")
    assert code == 0 and out.startswith("graph G {")
    code, out, _ = call(capsys, "orbit", "extend-check", "--n", "6", "--U", "0,1", "--V", "2")
    assert code == 0 and json.loads(out)["witness"] is not None
    code, out, _ = call(capsys, "orbit", "experiment", "--sizes", "1,4", "--uv-bound", "1", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "size,pairs,witnessed,fraction,edges"


def test_oracle_command(capsys):
    code, out, _ = call(capsys, "oracle", "metric", "--points", "2", "--max", "2")
    assert code == 0 and json.loads(out)["suite"] == "metric"


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "urysohn_forge.cli", "group2", "expo3", "--alpha", "6", "--eps", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["forced"] is False
