import json
import os

import pytest

from . import __version__
from .cli import run


def test_dvalue(capsys):
    assert run(["dvalue", "10"]) == 0
    assert capsys.readouterr().out == "D(10)=9 k=2 match=true\n"


def test_dvalue_json(capsys):
    assert run(["dvalue", "100", "--format", "json", "--backend", "dict"]) == 0
    assert json.loads(capsys.readouterr().out) == {"n": 100, "k": 3, "D": 27, "match": True}


def test_dvalue_csv(capsys):
    assert run(["dvalue", "81", "--format", "csv"]) == 0
    assert capsys.readouterr().out.splitlines() == ["n,k,D,match", "81,2,9,true"]


def test_format_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("DISCRIM_FORMAT", "json")
    assert run(["dvalue", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["D"] == 3


def test_collide_json(capsys):
    assert run(["collide", "100", "16", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out) == {
        "n": 100, "m": 16, "a": 11, "b": 15, "quotient": 8, "case": "II"
    }


def test_collide_human(capsys):
    assert run(["collide", "1000", "44"]) == 0
    assert capsys.readouterr().out == "n=1000 m=44 a=38 b=54 quotient=53 case=VI\n"


def test_collide_out_of_range(capsys):
    assert run(["collide", "100", "10"]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "sqrt(n) < m" in captured.err


def test_classify(capsys):
    assert run(["classify", "16"]) == 0
    assert capsys.readouterr().out == "m=16 case=II(r=4)\n"
    assert run(["classify", "35", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out) == {
        "m": 35, "case": "V", "r": 0, "s": 0, "has5": True
    }


def test_classify_power_of_three(capsys):
    assert run(["classify", "27"]) == 1
    assert "power of 3" in capsys.readouterr().err


def test_scan(capsys):
    assert run(["scan", "2", "10"]) == 0
    assert capsys.readouterr().out.startswith("scanned n in [2, 10]: 9 rows, 0 failures")


def test_scan_csv(capsys):
    assert run(["scan", "2", "10", "--format", "csv", "--workers", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,k,D,match"
    assert [line.split(",")[2] for line in lines[1:]] == ["3"] * 8 + ["9"]


def test_scan_json_is_worker_independent(capsys):
    assert run(["scan", "2", "50", "--format", "json"]) == 0
    one = capsys.readouterr().out
    assert run(["scan", "2", "50", "--format", "json", "--workers", "3"]) == 0
    assert capsys.readouterr().out == one
    assert json.loads(one)["failures"] == []


def test_scan_unwritable_checkpoint(capsys, tmp_path):
    path = tmp_path / "readonly"
    path.mkdir()
    os.chmod(path, 0o500)
    try:
        code = run(["scan", "2", "2", "--checkpoint", str(path / "missing" / "ck.jsonl")])
    finally:
        os.chmod(path, 0o700)
    assert code == 2
    assert "checkpoint" in capsys.readouterr().err


def test_expsum_identity(capsys):
    assert run(["expsum", "identity", "--delta", "1", "--p", "5", "--r", "1", "--format", "json"]) == 0
    document = json.loads(capsys.readouterr().out)
    assert document["pass"] is True
    assert all(check["pass"] for check in document["checks"])


def test_expsum_identity_rejects_p_one_mod_three(capsys):
    assert run(["expsum", "identity", "--delta", "1", "--p", "7", "--r", "1"]) == 2


def test_expsum_bounds(capsys):
    assert run(["expsum", "bounds", "--p", "5", "--j", "2"]) == 0
    out = capsys.readouterr().out
    assert "PASS kloosterman_max" in out
    assert "FAIL" not in out
    assert run(["expsum", "bounds", "--p", "7", "--j", "2", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "name,measured,bound,pass"


def test_thresholds(capsys):
    assert run(["thresholds", "--p", "5", "--r", "9"]) == 0
    assert "check1=true" in capsys.readouterr().out
    assert run(["thresholds", "--p", "11", "--r", "1", "--format", "json"]) == 1
    record = json.loads(capsys.readouterr().out)
    assert record["check3"] is False


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["dvalue"],
        ["dvalue", "ten"],
        ["frobnicate"],
        ["scan", "2"],
        ["dvalue", "10", "--format", "xml"],
        ["expsum", "bounds", "--p", "5"],
    ],
)
def test_usage_errors(argv, capsys):
    assert run(argv) == 2
    assert capsys.readouterr().out == ""


def test_domain_errors_are_usage_errors(capsys):
    assert run(["dvalue", "1"]) == 2
    assert run(["scan", "10", "5"]) == 2


def test_version(capsys):
    assert run(["--version"]) == 0
    assert __version__ in capsys.readouterr().out
