import json
import subprocess
import sys

import pytest

from hyperlaplace.cli import main

COUPLED3 = """vars x, y;
ops X1 = Dx, X2 = Dy, X3 = Dx + Dy;
system {
  X1(u1) = u1 + 2*u2 + u3;
  X2(u2) = -6*u1 + u2 + 2*u3;
  X3(u3) = 12*u1 + 6*u2 + u3;
}
"""

INVERSE_SQUARE_C1 = "vars x, y;\nequation { Dx*Dy - 1/(x+y)^2 }\n"


@pytest.fixture
def write(tmp_path):
    def _write(text, name="problem.hl"):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    return _write


def run(argv, capsys):
    code = main(argv)
    return code, json.loads(capsys.readouterr().out)


def test_coupled3_verified(write, capsys):
    code, rep = run([write(COUPLED3), "--verify"], capsys)
    assert code == 0
    assert rep["schema"] == 1
    assert rep["status"] == "verified"
    assert rep["path"] == ["1:3"]
    assert rep["verification"]["passed"]
    assert rep["verification"]["max_residual"] <= 1e-9


def test_report_key_order(write, capsys):
    _, rep = run([write(COUPLED3)], capsys)
    assert list(rep)[:4] == ["schema", "status", "input", "problem_kind"]
    assert rep["status"] == "solved"
    assert rep["input"] == COUPLED3


def test_inverse_square_c1_is_exhausted(write, capsys):
    code, rep = run([write(INVERSE_SQUARE_C1), "--max-depth", "5", "--chain-max", "5:5"], capsys)
    assert code == 2
    assert rep["status"] == "exhausted"
    (chain,) = rep["chains"]
    assert chain["status"] == "depth-exhausted"
    assert all(v != "0" for v in chain["invariants"].values())


def test_malformed_input(write, capsys):
    code, rep = run([write("vars x, y;\nequation { Dx*(Dy + 1) }\n")], capsys)
    assert code == 1
    assert rep["status"] == "error"
    (diag,) = rep["diagnostics"]
    assert diag["kind"] == "syntax"
    assert diag["line"] == 2


def test_missing_file(tmp_path, capsys):
    code, rep = run([str(tmp_path / "absent.hl")], capsys)
    assert code == 1
    assert rep["status"] == "error"


def test_flags_override_file_config(write, capsys):
    text = "vars x, y;\nconfig { chain_max = 1:1; max_depth = 0; }\nequation { Dx*Dy - 6/(x+y)^2 }\n"
    path = write(text)
    code, rep = run([path], capsys)
    assert code == 2
    assert rep["config"]["chain_max"] == [1, 1]
    code, rep = run([path, "--chain-max", "3:3"], capsys)
    assert code == 0
    assert rep["config"]["chain_max"] == [3, 3] and rep["config"]["max_depth"] == 0


def test_bad_config_value(write, capsys):
    code, rep = run([write("vars x, y;\nconfig { chain_max = five; }\nequation { Dx*Dy }\n")], capsys)
    assert code == 1
    assert "configuration" in rep["diagnostics"][0]


def test_manual_pivots(write, capsys):
    code, rep = run([write(COUPLED3), "--pivots", "manual=1:2"], capsys)
    assert code == 0
    assert rep["path"] == ["1:2"]


def test_reports_are_deterministic(write, capsys):
    path = write(COUPLED3)
    _, a = run([path, "--verify", "--seed", "3"], capsys)
    _, b = run([path, "--verify", "--seed", "3"], capsys)
    a.pop("elapsed_seconds")
    b.pop("elapsed_seconds")
    assert a == b


def test_text_format(write, capsys):
    assert main([write(COUPLED3), "--format", "text", "--verify"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("status: verified")
    assert "pivots: 1:3" in out


def test_module_entry_point(write):
    proc = subprocess.run(
        [sys.executable, "-m", "hyperlaplace", write(INVERSE_SQUARE_C1), "--chain-max", "2:2", "--max-depth", "0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
    assert json.loads(proc.stdout)["status"] == "exhausted"
