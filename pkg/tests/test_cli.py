import json

import pytest

from entropy_rigidity.cli import main


def run(capsys, *argv):
    code = main(list(argv) + ["--json"])
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_table_validate(capsys):
    code, doc = run(capsys, "table", "validate", "three-disks")
    assert code == 0 and doc["schema_version"] == "1" and doc["command"] == "table validate"
    assert doc["result"]["valid"] is True


def test_orbit_find_reports_the_closed_form(capsys):
    code, doc = run(capsys, "orbit", "find", "12")
    assert code == 0
    assert doc["result"]["flow_period"].startswith("8.0000000000")
    assert doc["result"]["lambda"].startswith("0.0102051443364380360543")


def test_orbit_step(capsys):
    code, doc = run(capsys, "orbit", "step", "--obstacle", "1", "--s", "0", "--phi", "0", "--steps", "2")
    assert code == 0
    assert [s["obstacle"] for s in doc["result"]["steps"]] == [2, 1]


@pytest.mark.parametrize("argv, code, err", [
    (("orbit", "find", "11"), 2, "admissibility"),
    (("orbit", "step", "--obstacle", "1", "--s", "4.71238898", "--phi", "0"), 3, "escape"),
    (("flexibility", "sample", "--sft", "golden", "--target", "0.6,1.0"), 4, "infeasible"),
    (("table", "validate", "no-such-table"), 2, "validation"),
])
def test_error_exit_codes(capsys, argv, code, err):
    got, doc = run(capsys, *argv)
    assert got == code
    assert doc["error"]["code"] == err


def test_suspension_command(capsys):
    code, doc = run(capsys, "entropy", "suspension", "--sft", "golden", "--roof", "golden-roof")
    assert code == 0
    float(doc["result"]["suspension_htop"])


def test_flexibility_sample(capsys):
    code, doc = run(capsys, "flexibility", "sample", "--sft", "golden", "--target", "0.3,1.2", "--region", "II")
    assert code == 0


def test_precision_floor(capsys):
    code, doc = run(capsys, "orbit", "find", "12", "--precision", "32")
    assert code == 2


def test_text_output(capsys):
    assert main(["orbit", "find", "--word", "123"]) == 0
    assert "123" in capsys.readouterr().out
