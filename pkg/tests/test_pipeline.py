import json
import os

import pytest

from entropy_rigidity.cli import main
from entropy_rigidity.config import bundled, load_experiment
from entropy_rigidity.pipeline import run_pipeline

SMALL = """[experiment]
table = {table}
precision = 256
words = 12, 13
out = out

[normal_form]
word = 12
order = 7
K = 2
J = 4
depth = 4

[horseshoe]
block = 12
connector = 13
n_max = {n_max}
fits = period, trace

[suspension]
sft = {sft}
grid = 8
"""


def write_config(tmp_path, n_max=14):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL.format(table=bundled("tables/three-disks.cfg"), sft=bundled("sft/golden.cfg"), n_max=n_max))
    return str(p)


def read_all(d):
    return {n: open(os.path.join(d, n), "rb").read() for n in sorted(os.listdir(d))}


@pytest.fixture(scope="module")
def small_runs(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("pipe")
    cfg = load_experiment(write_config(tmp))
    a, b = str(tmp / "a"), str(tmp / "b")
    sa, _ = run_pipeline(cfg, a)
    sb, _ = run_pipeline(cfg, b, workers=2)
    return sa, sb, a, b


def test_small_pipeline_completes(small_runs):
    sa, sb, a, _ = small_runs
    assert sa == 0 and sb == 0
    summary = json.load(open(os.path.join(a, "summary.json")))
    # the 12 and 13 orbits have equal exponents but a_1 = lambda/2 is far from zero
    assert summary["rigidity"]["verdict"] == "MME=SRB obstructed"
    manifest = open(os.path.join(a, "MANIFEST")).read().splitlines()
    assert manifest[-1] == "status: complete"
    for name in ("orbits.csv", "family.csv", "fits.txt", "rigidity.txt", "trace.dat", "suspension.csv"):
        assert any(line.endswith("  " + name) for line in manifest)


def test_reruns_are_byte_identical(small_runs):
    _, _, a, b = small_runs
    assert read_all(a) == read_all(b)


def test_failed_stage_leaves_a_partial_manifest(tmp_path):
    cfg = load_experiment(write_config(tmp_path, n_max=60))
    out = str(tmp_path / "bad")
    status, run = run_pipeline(cfg, out)
    assert status == 2
    manifest = open(os.path.join(out, "MANIFEST")).read()
    assert "status: partial (stage validate failed: " in manifest
    summary = json.load(open(os.path.join(out, "summary.json")))
    assert summary["error"]["stage"] == "validate"


def test_pipeline_validate_command(tmp_path, capsys):
    assert main(["pipeline", "validate", write_config(tmp_path), "--json"]) == 0
    capsys.readouterr()
    assert main(["pipeline", "validate", write_config(tmp_path, n_max=60), "--json"]) == 2
