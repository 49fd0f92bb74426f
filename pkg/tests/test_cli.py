import csv
import io
import json
import subprocess
import sys

from cyrank2.cli import INVARIANT_HEADER, TABLE_HEADER, main

MU_AMPLE = [1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 1, 1, 1, 0, 1, 0, 1, 1, 1, 1, 1, 0, 0, 0, 0, 1, 1, 0]


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def _row(table, no):
    return table[no].to_json()


def test_check_accepts_row1(tmp_path, table, capsys):
    path = _write(tmp_path, "r1.json", _row(table, 1))
    assert main(["check", path]) == 0
    out = capsys.readouterr().out
    assert "accepted" in out and "dolgachev" in out


def test_check_rejects_wrong_mu(tmp_path, table, capsys):
    d = _row(table, 1)
    d["mu"]["u"] = [3, 2]
    path = _write(tmp_path, "bad.json", d)
    assert main(["check", path, "--json"]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["verdict"] == "rejected" and rep["reason"] == "not weakly Calabi-Yau"


def test_check_json_roundtrip(tmp_path, table, capsys):
    path = _write(tmp_path, "r7.json", _row(table, 7))
    assert main(["check", path, "--json", "--invariants"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["sd"] == _row(table, 7)
    assert rep["route"]["route"] == "simplex-certificate"
    assert rep["invariants"]["mu3"] == "243"


def test_malformed_inputs(tmp_path, capsys):
    assert main(["check", _write(tmp_path, "x.json", "{not json")]) == 2
    assert main(["check", _write(tmp_path, "y.json", {"Q": 1})]) == 2
    assert main(["check", str(tmp_path / "missing.json")]) == 2
    assert main(["bogus"]) == 2
    assert "error" in capsys.readouterr().err


def test_invariants_builtin(capsys):
    assert main(["invariants", "--builtin"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == INVARIANT_HEADER
    assert len(rows) == 31
    assert rows[1] == ["1", "2", "(3,3)", "486", "(0,0)", "true"]
    assert rows[2][4] == "(0,0)+0"
    assert [int(r[-1] == "true") for r in rows[1:]] == MU_AMPLE


def test_invariants_empty_and_missing(tmp_path, capsys):
    assert main(["invariants", _write(tmp_path, "e.json", [])]) == 0
    assert capsys.readouterr().out.strip() == ",".join(INVARIANT_HEADER)
    assert main(["invariants"]) == 2


def test_gitfan(tmp_path, table, capsys):
    assert main(["gitfan", _write(tmp_path, "r11.json", _row(table, 11)), "--json"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert len(info["chambers"]) == 2
    assert main(["gitfan", _write(tmp_path, "r5.json", _row(table, 5))]) == 0
    out = capsys.readouterr().out
    assert out.count("chamber ") == 1 and "Mov = cone" in out
    d = _row(table, 1)
    d["mu"]["u"] = [3, 0]
    assert main(["gitfan", _write(tmp_path, "o.json", d)]) == 2


def test_classify_constellation_I(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["classify", "--bound", "3", "--constellation", "I", "-o", str(out)]) == 0
    text = capsys.readouterr().out
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == TABLE_HEADER
    assert [r[0] for r in rows[1:3]] == ["1", "2"]
    assert (out / "table.csv").read_text().splitlines()[0] == ",".join(TABLE_HEADER)
    diff = json.loads((out / "diff.json").read_text())
    assert diff["missing"] == [] and diff["extra"] == []


def test_classify_small_bound_nonzero(capsys):
    assert main(["classify", "--bound", "2", "--constellation", "II"]) == 1
    assert "missing [4]" in capsys.readouterr().out


def test_classify_config_error(capsys):
    assert main(["classify", "--bound", "0"]) == 2
    assert main(["classify", "--constellation", "IX"]) == 2


def test_output_is_deterministic(tmp_path, table):
    path = _write(tmp_path, "r3.json", _row(table, 3))
    runs = [subprocess.run([sys.executable, "-m", "cyrank2.cli", "check", path, "--json"],
                           capture_output=True, text=True) for _ in range(2)]
    assert runs[0].returncode == 0 and runs[0].stdout == runs[1].stdout
