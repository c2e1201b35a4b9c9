import json
import math
import subprocess

import pytest

from bphi_lab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_norm_bphi_example(capsys):
    code, out, _ = run(capsys, "norm", "--kind", "bphi", "--fn", "mono:1", "--weight", "power:0")
    assert code == 0
    assert out["value"] == 1.0
    assert out["witness"] == [0.0, 0.0]
    assert out["spec"]["n_theta"] == 256


def test_norm_bmoa_and_arc(capsys):
    code, out, _ = run(capsys, "norm", "--kind", "bmoa", "--fn", "mono:1")
    assert code == 0 and abs(out["value"] - math.sqrt(0.5)) < 1e-6
    code, out, _ = run(capsys, "norm", "--kind", "bmo_arc", "--fn", "mono:1", "--ntheta", "64")
    assert code == 0 and out["value"] > 0


def test_g_example(capsys):
    code, out, _ = run(capsys, "g", "--weight", "power:0.5", "--x", "0.25")
    assert code == 0 and out["value"] == 0.75


def test_numeric_flags_echoed_exactly(capsys):
    argv = ["expint", "--fn", "mono:1", "--weight", "power:0.25", "--r", "0.3333333333333333",
            "--gamma", "0.1", "--ntheta", "128", "--nrho", "32", "--delta", "0.00125", "--refine", "2"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    echo = out["args"]
    assert echo["r"] == 0.3333333333333333 and echo["gamma"] == 0.1
    assert echo["ntheta"] == 128 and echo["nrho"] == 32 and echo["delta"] == 0.00125 and echo["refine"] == 2
    assert out["spec"]["delta"] == 0.00125


def test_dist_writes_csv(capsys, tmp_path):
    path = tmp_path / "d.csv"
    code, out, _ = run(capsys, "dist", "--fn", "log1mz", "--r", "0.9", "--lambda-max", "3", "--out", str(path))
    assert code == 0 and out["csv"] == str(path)
    assert path.read_text().startswith("lambda,E\n")
    assert set(out["moments"]) == {"1", "2", "4"}


def test_growth_seed_reproducible(capsys):
    argv = ["growth", "--fn", "lacunary:16", "--weight", "power:0", "--r", "0.99", "--rays", "16", "--seed", "5"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    _, c, _ = run(capsys, *argv[:-1], "6")
    assert a["ratios"] == b["ratios"] and a["ratios"] != c["ratios"]


def test_corpus_lists_labels(capsys):
    code, out, _ = run(capsys, "corpus")
    assert code == 0 and "log1mz" in out["functions"]


@pytest.mark.parametrize(
    "argv",
    [
        ["norm", "--fn", "nope", "--weight", "power:0"],
        ["norm", "--fn", "mono:1", "--weight", "cosine"],
        ["norm", "--kind", "bphi", "--fn", "mono:1"],
        ["g", "--weight", "power:0.5"],
        ["frobnicate"],
        ["norm", "--kind", "lp", "--fn", "mono:1"],
        ["norm", "--fn", "mono:1", "--weight", "power:0", "--ntheta", "2"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out is None
    assert err


def test_computation_error_exit_1(capsys):
    code, out, err = run(capsys, "g", "--weight", "power:0.5", "--x", "1.5")
    assert code == 1 and "error" in out and err


def test_verify_passes_and_writes_report(capsys, tmp_path):
    code, out, err = run(capsys, "verify", "--theorem", "bloch", "--out", str(tmp_path))
    assert code == 0 and out["failed"] == 0
    assert (tmp_path / "report.csv").exists() and (tmp_path / "report_summary.json").exists()
    assert "records" in err


def test_verify_failure_exit_3(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"corpus": ["const:1"], "weights": ["power:0"], "r_grid": [0.5]}))
    code, out, _ = run(capsys, "verify", "--theorem", "t2", "--config", str(cfg), "--out", str(tmp_path / "r"))
    assert code == 3 and out["failed"] > 0


def test_verify_bad_config_is_usage_error(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"corpus": ["nope"]}))
    assert run(capsys, "verify", "--config", str(cfg))[0] == 2
    assert run(capsys, "verify", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_entry_point_installed():
    res = subprocess.run(["bphi-lab", "g", "--weight", "power:0", "--x", "0.5"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["value"] == pytest.approx(math.log(2), rel=1e-15)
