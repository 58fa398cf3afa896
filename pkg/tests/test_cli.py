import json
import subprocess
import sys

import pytest

from endotrace.algebra import integers
from endotrace.cli import main
from endotrace.dualizable import free_presentation
from endotrace.endo import endo_from_carrier_map, make_endo, untwisted

Z = integers()


def write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def two_endo(tmp_path):
    e = make_endo(untwisted(Z, Z), 1, free_presentation(Z, 1), [[2]])
    return write(tmp_path / "two.json", e.to_json())


def test_trace_sequence(two_endo, tmp_path, capsys):
    out = tmp_path / "tr.json"
    assert main(["trace", "--in", two_endo, "--bound", "4", "--json", str(out)]) == 0
    data = json.loads(out.read_text())
    assert [g["matrix"][0][0] for g in data] == [2, 4, 8, 16]
    assert "tr_4" in capsys.readouterr().out


def test_single_trace_of_swap(tmp_path, capsys):
    s = endo_from_carrier_map(untwisted(Z, Z), free_presentation(Z, 2), [[[0], [1]], [[1], [0]]])
    path = write(tmp_path / "swap.json", s.to_json())
    assert main(["trace", "--in", path]) == 0
    assert "<Z> -> <Z>" in capsys.readouterr().out


def test_frobenius_then_verschiebung_round_trip(two_endo, tmp_path):
    f2 = tmp_path / "f2.json"
    assert main(["frobenius", "--in", two_endo, "-n", "2", "--out", str(f2)]) == 0
    assert json.loads(f2.read_text())["exponent"] == 2
    v = tmp_path / "v.json"
    assert main(["verschiebung", "--in", str(f2), "-n", "2", "--out", str(v)]) == 0
    tr = tmp_path / "tr.json"
    assert main(["trace", "--in", str(v), "--bound", "4", "--json", str(tr)]) == 0
    assert [g["matrix"][0][0] for g in json.loads(tr.read_text())] == [0, 8, 0, 32]


def test_verschiebung_length_mismatch_is_input_error(two_endo, tmp_path, capsys):
    out = tmp_path / "v.json"
    assert main(["verschiebung", "--in", two_endo, "-n", "3", "--out", str(out)]) == 2
    assert "exponent" in capsys.readouterr().err


def test_ch_and_ghost_of_a_matrix(tmp_path, capsys):
    m = write(tmp_path / "m.json", {"base": "integers", "matrix": [[0, 1], [1, 0]]})
    assert main(["ch", "--matrix", m, "--bound", "4"]) == 0
    assert "ch: 0 1 0 1" in capsys.readouterr().out
    assert main(["ghost", "--matrix", m, "--bound", "4"]) == 0
    assert "ghost: 0 2 0 2" in capsys.readouterr().out
    assert main(["ghost", "--matrix", m]) == 2


def test_witt_operations(tmp_path, capsys):
    a = write(tmp_path / "a.json", {"base": "integers", "N": 4, "coeffs": [2, 4, 8, 16]})
    b = write(tmp_path / "b.json", {"base": "integers", "N": 4, "coeffs": [3, 9, 27, 81]})
    out = tmp_path / "prod.json"
    assert main(["witt", "mul", "--a", a, "--b", b, "--json", str(out)]) == 0
    assert json.loads(out.read_text())["coeffs"] == [6, 36, 216, 1296]
    assert main(["witt", "frob", "--a", a, "-n", "2"]) == 0
    assert "frob: 4 16" in capsys.readouterr().out
    assert main(["witt", "versch", "--a", a, "-n", "2"]) == 0
    assert "versch: 0 2 0 4" in capsys.readouterr().out
    assert main(["witt", "add", "--a", a]) == 2
    assert main(["ghost", "--witt", a]) == 0
    assert "ghost: 2 4 8 16" in capsys.readouterr().out


def test_verify_exit_codes(tmp_path):
    report = tmp_path / "r.json"
    assert main(["verify", "--suite", "witt", "--seed", "3", "--cases", "3",
                 "--json", str(report)]) == 0
    assert json.loads(report.read_text())["ok"] is True
    assert main(["verify", "--suite", "nope"]) == 2
    assert main(["verify", "--caps", "colour=2"]) == 2
    assert main(["verify", "--seed", "-4"]) == 2


def test_input_errors(tmp_path):
    missing = str(tmp_path / "missing.json")
    assert main(["trace", "--in", missing]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["trace", "--in", str(bad)]) == 2
    assert main(["trace", "--in", write(tmp_path / "e.json", {"kind": "endo"})]) == 2
    assert main(["bogus"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "endotrace", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "verify" in proc.stdout
