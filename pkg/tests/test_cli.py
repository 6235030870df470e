import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from ou_selfnorm.cli import main
from ou_selfnorm.config import parse_config
from ou_selfnorm.errors import DomainError
from ou_selfnorm.runner import emit_plot_data, integral_verdict, run_experiment

OU_SMALL = """\
experiment = ou-convergence
dist = rademacher
n = 50
reps = 400
seed = 11
calibration_reps = 3
calibration_min = 0
grid_step = 0.05
ks_bound = 0.5
tolerance = 0.5
"""


def write(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_outputs(d):
    return {p.name: p.read_bytes() for p in sorted(Path(d).iterdir())}


def test_list_experiments(capsys):
    assert main(["list-experiments"]) == 0
    out = capsys.readouterr().out
    for name in ("ou-convergence", "functional", "moment", "bm-transform", "integral-limit-comparison"):
        assert name in out


def test_validate(tmp_path, capsys):
    assert main(["validate", write(tmp_path, OU_SMALL)]) == 0
    assert main(["validate", write(tmp_path, OU_SMALL.replace("reps = 400", "reps = 0"))]) == 2
    assert "at least one replication" in capsys.readouterr().err
    assert main(["validate", str(tmp_path / "missing.cfg")]) == 2


def test_reps_zero_is_config_error_before_any_work(tmp_path):
    out = tmp_path / "out"
    assert main(["run", write(tmp_path, OU_SMALL.replace("reps = 400", "reps = 0")), "--out", str(out)]) == 2
    assert not out.exists()


def test_run_writes_complete_manifest(tmp_path):
    out = tmp_path / "out"
    assert main(["run", write(tmp_path, OU_SMALL), "--out", str(out), "--workers", "1"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert sorted(os.listdir(out)) == manifest["files"]
    assert manifest["status"] == "complete" and manifest["all_pass"]
    assert isinstance(manifest["wall_time_s"], float)
    assert "seed = 11" in manifest["config"] and manifest["artifact_version"]
    report = json.loads((out / "report.json").read_text())
    assert {r["check"] for r in report} == {c["check"] for c in manifest["checks"]}
    for r in report:
        assert {"check", "spec", "params", "estimate", "std_error", "target", "z", "pass"} <= set(r)
    assert (out / "sn_max.csv").read_text().startswith("value\n")
    assert (out / "sn_max.hist.csv").read_text().startswith("bin_left,bin_right,count,density\n")


def test_deterministic_reruns_and_worker_independence(tmp_path):
    cfg = write(tmp_path, OU_SMALL)
    runs = []
    for k, workers in enumerate(("1", "1", "2")):
        out = tmp_path / f"o{k}"
        assert main(["run", cfg, "--out", str(out), "--deterministic", "--workers", workers]) == 0
        runs.append(read_outputs(out))
    assert runs[0] == runs[1] == runs[2]
    assert json.loads(runs[0]["manifest.json"])["wall_time_s"] is None


def test_nondeterministic_mode_same_samples(tmp_path):
    cfg = write(tmp_path, OU_SMALL)
    main(["run", cfg, "--out", str(tmp_path / "a"), "--deterministic", "--workers", "1"])
    main(["run", cfg, "--out", str(tmp_path / "b"), "--workers", "2"])
    a = np.loadtxt(tmp_path / "a" / "sn_max.csv", skiprows=1)
    b = np.loadtxt(tmp_path / "b" / "sn_max.csv", skiprows=1)
    # completion order may permute blocks, never the values
    np.testing.assert_array_equal(np.sort(a), np.sort(b))


def test_statistical_failure_exit_1(tmp_path):
    bad = OU_SMALL.replace("tolerance = 0.5", "tolerance = 1e-9")
    assert main(["run", write(tmp_path, bad), "--out", str(tmp_path / "o"), "--workers", "1"]) == 1


def test_capacity_error_exit_3(tmp_path):
    cfg = OU_SMALL + "max_knots = 20\n"
    out = tmp_path / "o"
    assert main(["run", write(tmp_path, cfg), "--out", str(out), "--workers", "1"]) == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "aborted" and "cap" in manifest["error"]
    assert manifest["files"] == ["manifest.json"]


def test_moment_b2_rademacher_exact(tmp_path):
    cfg = parse_config("experiment = moment\nmoment = b2\ndist = rademacher\nj = 4\nreps = 1000\nseed = 1\n")
    m = run_experiment(cfg, out_dir=str(tmp_path), workers=1, deterministic=True)
    assert m.exit_code == 0
    rec = json.loads((tmp_path / "report.json").read_text())[0]
    assert rec["std_error"] == 0.0 and rec["pass"] and rec["estimate"] == pytest.approx(0.2, abs=1e-12)


@pytest.mark.parametrize("example", ["1a", "1b", "2a", "2b", "2c", "1pa", "1pb", "2pa", "2pb", "2pc"])
def test_every_functional_example_runs(tmp_path, example):
    text = f"experiment = functional\nexample = {example}\ndist = normal\nm = 100\nreps = 200\nseed = 5\nks_bound = 0.3\n"
    m = run_experiment(parse_config(text), out_dir=str(tmp_path), workers=1, deterministic=True)
    assert m.status == "complete" and m.exit_code == 0
    assert sorted(os.listdir(tmp_path)) == m.files


def test_bm_transform_runs(tmp_path):
    text = "experiment = bm-transform\ndist = uniform\nn = 50\nreps = 2000\nseed = 2\ntolerance = 0.3\n"
    m = run_experiment(parse_config(text), out_dir=str(tmp_path), workers=1, deterministic=True)
    assert m.exit_code == 0
    assert any(c["check"].startswith("bm-var") for c in m.checks)


def test_weighted_limit_identified_on_long_window(tmp_path):
    # on a window of length 2 the two candidate laws separate clearly
    text = ("experiment = integral-limit-comparison\ndist = normal\nn = 200\ns = 0\nt = 2\n"
            "reps = 4000\nseed = 31\ngrid_step = 0.01\n")
    m = run_experiment(parse_config(text), out_dir=str(tmp_path), workers=1, deterministic=True)
    verdict = (tmp_path / "verdict.txt").read_text()
    assert "verdict: weighted" in verdict
    assert m.exit_code == 0


def test_integral_verdict_rule():
    assert integral_verdict({"plain": 0.01, "weighted": 0.2}, 0.05) == "plain"
    assert integral_verdict({"plain": 0.01, "weighted": 0.02}, 0.05) == "ambiguous"
    assert integral_verdict({"plain": 0.1, "weighted": 0.2}, 0.05) == "neither"


def test_histogram_examples():
    rows = emit_plot_data([3.0], 1).splitlines()
    assert rows[0] == "bin_left,bin_right,count,density" and len(rows) == 2
    lo, hi, count, dens = map(float, rows[1].split(","))
    assert count == 1 and dens == pytest.approx(1 / (hi - lo))
    rows = emit_plot_data(np.linspace(0, 1, 100), 2).splitlines()[1:]
    assert [int(r.split(",")[2]) for r in rows] == [50, 50]
    with pytest.raises(DomainError):
        emit_plot_data([], 3)


@pytest.mark.parametrize("seed", range(5))
def test_histogram_normalization(seed):
    x = np.random.default_rng(seed).standard_cauchy(500)
    rows = [list(map(float, r.split(","))) for r in emit_plot_data(x, 17).splitlines()[1:]]
    assert sum(r[3] * (r[1] - r[0]) for r in rows) == pytest.approx(1.0, rel=1e-12)
    assert sum(r[2] for r in rows) == 500


def test_console_script_entry(tmp_path):
    res = subprocess.run([sys.executable, "-m", "ou_selfnorm.cli", "list-experiments"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "moment" in res.stdout
