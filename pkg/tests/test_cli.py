import json
from pathlib import Path

import pytest

from qwalk.cli import run

WALKS = Path(__file__).resolve().parents[1] / "demos" / "walks"


def _json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_validate_and_analyze(capsys):
    code, out = _json(capsys, ["validate", "--walk", str(WALKS / "W1.json")])
    assert code == 0
    code, out = _json(capsys, ["analyze", "--walk", str(WALKS / "W2.json")])
    assert code == 0 and out["group"]["order"] == 6


def test_absorb_w1_total(capsys):
    code, out = _json(capsys, ["absorb", "--walk", str(WALKS / "W1.json"), "--kmax", "5"])
    assert code == 0
    assert out["total"] == pytest.approx(8 / 9, abs=1e-12)
    assert len(out["h"]) == 5
    lo, hi = out["bounds"]
    assert lo <= out["total"] <= hi


def test_start_override(capsys):
    _, a = _json(capsys, ["absorb", "--walk", str(WALKS / "W3.json"), "--kmax", "3"])
    _, b = _json(capsys, ["absorb", "--walk", str(WALKS / "W3.json"), "--kmax", "3",
                          "--start", "2", "3"])
    assert a["total"] != b["total"]


def test_outputs_are_byte_identical(capsys):
    argv = ["oracle", "--walk", str(WALKS / "W3.json"), "--mode", "mc", "--paths", "20000",
            "--seed", "3", "--kmax", "5"]
    assert run(argv) == 0
    first = capsys.readouterr().out
    assert run(argv) == 0
    assert capsys.readouterr().out == first


def test_tails_csv(capsys):
    assert run(["tails", "--walk", str(WALKS / "W3.json"), "--kmax", "8", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 9 and "," in lines[0]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "green.json"
    code = run(["green", "--walk", str(WALKS / "W1.json"), "--i", "3", "--j", "3",
                "--oracle", "--N", "100", "--out", str(target)])
    assert code == 0 and capsys.readouterr().out == ""
    out = json.loads(target.read_text())
    assert (out["i"], out["j"], out["method"]) == (3, 3, "interior")
    assert out["oracle"]["N"] == 100 and out["oracle"]["value"] > 0


def test_compare_w1_passes(capsys):
    code = run(["compare", "--walk", str(WALKS / "W1.json"), "--kmax", "20", "--N", "600"])
    capsys.readouterr()
    assert code == 0


def test_exit_codes(tmp_path, capsys):
    assert run(["absorb", "--walk", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["validate", "--walk", str(bad)]) == 2
    assert run(["absorb", "--bogus-flag"]) == 2
    # absorption needs positive drift; W2 has none
    assert run(["absorb", "--walk", str(WALKS / "W2.json")]) == 2
    capsys.readouterr()
