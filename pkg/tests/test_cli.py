import json
import os

import pytest

from ozlab.cli import main, parse_targets, parse_window
from ozlab.errors import UsageError
from ozlab.manifest import RunManifest, file_digest
from cli_cases import run_all


@pytest.fixture(scope="module")
def two_runs(tmp_path_factory):
    a = tmp_path_factory.mktemp("run_a")
    b = tmp_path_factory.mktemp("run_b")
    return (a, *run_all(str(a))), (b, *run_all(str(b)))


def test_all_subcommands_succeed(two_runs):
    (_, codes, _), _ = two_runs
    assert codes == {k: 0 for k in codes}


def test_outputs_byte_identical(two_runs):
    (_, _, blobs_a), (_, _, blobs_b) = two_runs
    for name in blobs_a:
        assert blobs_a[name] == blobs_b[name], name
        assert all(x is not None for x in blobs_a[name]), name


def test_manifest_records_outputs_and_rerun(two_runs):
    (d, _, _), _ = two_runs
    man = RunManifest.read(os.path.join(d, "ray.csv.manifest.json"))
    assert man.exit_code == 0 and man.subcommand == "oz-extrapolate"
    digest = man.outputs[0]["sha256"]
    assert main(man.params["argv"]) == 0
    assert file_digest(os.path.join(d, "ray.csv")) == digest
    mc = RunManifest.read(os.path.join(d, "corr.csv.manifest.json"))
    assert mc.seeds[0] == 7 and len(mc.seeds) == 3
    assert os.path.join(d, "model.json") in mc.inputs


def test_outputs_parse(two_runs):
    (d, _, _), _ = two_runs
    rep = json.load(open(os.path.join(d, "renewal.json")))
    assert rep["residual"] < 1e-12
    body = json.load(open(os.path.join(d, "body.json")))
    assert body["meta"]["support_consistent"] and body["N"] == 10
    ax = json.load(open(os.path.join(d, "axioms.json")))
    assert [r["pass"] for r in ax] == [True, True, True] and ax[0]["constant"] == 0.8
    fit = json.load(open(os.path.join(d, "fit.json")))
    assert fit["constrained"]["p"] == 0.5


def test_usage_errors_exit_2(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert main([]) == 2
    assert main(["saw-enumerate", "--dim", "2"]) == 2
    assert main(["saw-enumerate", "--dim", "2", "--beta", "1", "--max-len", "4", "--out", out,
                 "--threads", "0"]) == 2
    assert "error:" in capsys.readouterr().err


def test_domain_errors_exit_1(tmp_path):
    out = str(tmp_path / "x.csv")
    assert main(["saw-enumerate", "--dim", "2", "--beta", "1", "--max-len", "40", "--out", out]) == 1
    assert main(["wulff", "--dim", "2", "--beta", "0.8", "--max-len", "10", "--out", out]) == 1
    man = RunManifest.read(out + ".manifest.json")
    assert man.exit_code == 1


def test_parsers():
    assert parse_targets("k*e1:2..4", 2) == [(2, (2, 0)), (3, (3, 0)), (4, (4, 0))]
    assert parse_window("8:32") == (8.0, 32.0)
    with pytest.raises(UsageError):
        parse_window("8")
    with pytest.raises(UsageError):
        parse_targets("nonsense", 2)
