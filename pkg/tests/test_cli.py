import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from qmk.cli import run

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "data" / "canonical13.qde"


def call(args, capsys, env=None):
    old = dict(os.environ)
    if env:
        os.environ.update(env)
    try:
        code = run(args)
    finally:
        os.environ.clear()
        os.environ.update(old)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_corpus(capsys):
    code, out, _ = call(["classify", "--q", "generic", str(CORPUS)], capsys)
    d = json.loads(out)
    assert code == 0
    assert set(d) == {"tool_version", "config_echo", "entries", "summary"}
    assert len(d["entries"]) == 13
    assert all(e["transformation"]["kind"] == "identity" for e in d["entries"])
    assert d["summary"]["failed"] == 0
    for e in d["entries"]:
        assert None not in e.values()


def test_classify_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    call(["classify", str(CORPUS), "-o", str(a)], capsys)
    call(["classify", str(CORPUS), "-o", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_malformed_line_continues(tmp_path, capsys):
    p = tmp_path / "in.qde"
    p.write_text("f(qz) = z*f +\nf(qz)^2 = 1 - f^2\n")
    code, out, _ = call(["classify", str(p)], capsys)
    d = json.loads(out)
    assert code == 2
    assert "line 1" in d["entries"][0]["error"]
    assert d["entries"][1]["canonical_id"] == "FERMAT-SINE"


def test_unclassified_exit_one(tmp_path, capsys):
    p = tmp_path / "in.qde"
    p.write_text("f(qz)^2 = z*(f^2+1)/(f^2+f+3)\n")
    code, out, _ = call(["classify", str(p)], capsys)
    assert code == 1


def test_unreadable_input(capsys):
    code, _, err = call(["classify", "/nonexistent/file.qde"], capsys)
    assert code == 2 and "cannot read" in err


def test_bad_tolerance_env(capsys):
    code, _, err = call(["constraints"], capsys, env={"QMK_TOLERANCE": "1e-30"})
    assert code == 2


def test_tolerance_env_echoed(capsys):
    code, out, _ = call(["constraints"], capsys, env={"QMK_TOLERANCE": "1e-7"})
    assert json.loads(out)["config_echo"]["tolerance"] == 1e-7


def test_solve_rational_matches_oracle(capsys):
    code, out, _ = call(["solve-rational", "--q", "root-of-unity:4", "--riccati-B", "1",
                         "--s-bound", "4"], capsys)
    d = json.loads(out)
    assert code == 0
    e = d["entries"][0]
    assert e["oracle_agrees"] is True
    assert len(e["solutions"]["families"]) == 2


def test_solve_linear(capsys):
    code, out, _ = call(["solve-rational", "--q", "3", "--linear", "9,0", "--k-bound", "5"], capsys)
    assert code == 0
    assert json.loads(out)["entries"][0]["solutions"]["families"][0]["degree"] == 2


def test_verify_riccati(capsys):
    code, out, _ = call(["verify", "--family", "riccati", "--a1", "1", "--a2", "2", "--q", "2"], capsys)
    e = json.loads(out)["entries"][0]
    assert code == 0 and e["residual_max"] < 1e-9 and e["A"] == "(-16/25)"


def test_verify_punctured_reports_literal_failure(capsys):
    code, out, _ = call(["verify", "--family", "punctured", "--k", "0.5", "--m", "1"], capsys)
    e = json.loads(out)["entries"][0]
    assert code == 1
    assert e["residual_max"] < 1e-6
    assert e["kappa_half_period_q"]["spread"] < 1e-6
    assert e["kappa_literal_q"]["spread"] > 1e-2


def test_constraints_command(capsys):
    code, out, _ = call(["constraints"], capsys)
    assert code == 0 and json.loads(out)["summary"]["failed"] == 0


def test_sn_eval(capsys):
    code, out, _ = call(["sn-eval", "--k", "0", "0.5"], capsys)
    e = json.loads(out)["entries"][0]
    import math
    assert code == 0 and abs(e["sn"][0] - math.sin(0.5)) < 1e-15


def test_sn_eval_pole(capsys):
    from qmk.special import agm_K
    Kp = agm_K(0.5)[1]
    code, out, _ = call(["sn-eval", "--k", "0.5", "--pole-tol", "1e-6", f"0+{Kp!r}j"], capsys)
    assert code == 1 and "distance" in json.loads(out)["entries"][0]["error"]


def test_growth_csv(tmp_path, capsys):
    csv = tmp_path / "g.csv"
    code, out, _ = call(["growth", "--family", "exp", "--grid", "400,2048", "--csv", str(csv)], capsys)
    assert code == 0
    assert csv.read_text().startswith("family,r,T0\n")


def test_console_script_installed():
    out = subprocess.run([sys.executable, "-m", "qmk.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "qmk" in out.stdout
