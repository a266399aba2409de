from __future__ import annotations
import math

import numpy as np
from click.testing import CliRunner

from src.filtered_hyper.cli import main
from src.filtered_hyper.estimator import DfhEstimator
from src.filtered_hyper.kernel import build_kernel
from src.filtered_hyper.serialization import read_estimator

SWEEP = """\
[experiment]
name = cli_tiny
seed = 1
output = {out}

[target]
spec = wendland

[sweep]
degrees = 1, 2, 3
noise = 0
"""


def _run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_fit_writes_estimator(tmp_path):
    out = tmp_path / "e.txt"
    result = _run("fit", "--n", 3, "--target", "mode:1,0", "--output", out)
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[0] == "# torus-estimator v1, n=3, m=1"
    assert len(lines) - 1 == len(build_kernel(3).modes)


def test_fit_rejects_bad_arguments(tmp_path):
    result = _run("fit", "--n", 2, "--servers", 0, "--output", tmp_path / "e.txt")
    assert result.exit_code == 2
    assert "m must be ≥ 1" in result.output
    result = _run("fit", "--n", 2, "--noise", 0.1, "--output", tmp_path / "e.txt")
    assert result.exit_code == 2
    assert "--seed" in result.output
    assert not (tmp_path / "e.txt").exists()


def test_fit_then_eval(tmp_path):
    est = tmp_path / "e.txt"
    assert _run("fit", "--n", 2, "--target", "mode:1,0", "--output", est).exit_code == 0
    pts = tmp_path / "pts.csv"
    pts.write_text("# x1,x2\n0,0\n0.5,-1.25\n3,2\n")
    result = _run("eval", "--estimator", est, "--points", pts)
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert any(line.startswith("#   estimator = ") and line.endswith("e.txt") for line in lines)
    rows = [tuple(float(v) for v in line.split(",")) for line in lines if not line.startswith("#")]
    assert len(rows) == 3
    for x1, _x2, value in rows:
        assert abs(value - math.cos(x1) / (2 * math.pi)) < 1e-10


def test_distributed_fit_round_trip(tmp_path):
    est, data = tmp_path / "e.txt", tmp_path / "d.csv"
    result = _run("fit", "--n", 2, "--servers", 4, "--noise", 0.05, "--seed", 9, "--output", est, "--save-data", data)
    assert result.exit_code == 0, result.output
    E = read_estimator(est)
    assert isinstance(E, DfhEstimator) and E.m == 4 and E.sizes == [36] * 4
    assert len(data.read_text().splitlines()) == 2 + 4 * 36
    again = tmp_path / "again.txt"
    assert _run("fit", "--n", 2, "--servers", 4, "--noise", 0.05, "--seed", 9, "--output", again).exit_code == 0
    assert again.read_bytes() == est.read_bytes()


def test_eval_needs_one_point_source(tmp_path):
    est = tmp_path / "e.txt"
    _run("fit", "--n", 1, "--output", est)
    assert _run("eval", "--estimator", est).exit_code == 2
    result = _run("eval", "--estimator", est, "--random", 5, "--seed", 3)
    assert result.exit_code == 0
    data = [line for line in result.output.strip().splitlines() if not line.startswith("#")]
    assert len(data) == 5
    assert "#   seed = 3" in result.output


def test_verify_quadrature_exit_codes():
    ok = _run("verify-quadrature", "--grid", 1, "--degree", 2)
    assert ok.exit_code == 0 and "PASS" in ok.output
    bad = _run("verify-quadrature", "--grid", 1, "--degree", 3)
    assert bad.exit_code == 1
    assert "FAIL" in bad.output and "(3,0)" in bad.output
    assert _run("verify-quadrature", "--degree", 2).exit_code == 2


def test_verify_solved_rule():
    result = _run("verify-quadrature", "--random", 300, "--degree", 2, "--seed", 4)
    assert result.exit_code == 0, result.output
    assert "solved_random(seed=4,n=2)" in result.output


def test_sweep_command(tmp_path):
    out = tmp_path / "sweep.csv"
    cfg = tmp_path / "tiny.ini"
    cfg.write_text(SWEEP.format(out=out))
    result = _run("sweep", cfg)
    assert result.exit_code == 0, result.output
    assert out.exists() and (tmp_path / "sweep.csv.plot.py").exists()
    assert "slope" in result.output
    data = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert len(data) == 1 + 3


def test_sweep_config_errors(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[sweep]\ndegrees = 3, 2\n")
    result = _run("sweep", cfg)
    assert result.exit_code == 2
    assert "line 2" in result.output
    assert _run("sweep", tmp_path / "missing.ini").exit_code == 2


def test_sweep_strict_exits_on_skipped(tmp_path):
    cfg = tmp_path / "skip.ini"
    cfg.write_text(SWEEP.format(out=tmp_path / "s.csv") + "sampling = random\nsamples_per_shard = 2\n")
    assert _run("sweep", cfg, "--no-plot-stub").exit_code == 0
    result = _run("sweep", cfg, "--strict", "--no-plot-stub")
    assert result.exit_code == 3
    assert not (tmp_path / "s.csv.plot.py").exists()


def test_filter_report():
    result = _run("filter-report")
    assert result.exit_code == 0
    assert "max_order = 6" in result.output and "tol = 1e-05" in result.output
    assert "smoothness class: C^5" in result.output
    assert "L1 norm of K_n" in result.output
    assert _run("filter-report", "--kernel-degrees", "0").exit_code == 2
