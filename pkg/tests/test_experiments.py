from __future__ import annotations
import math

import numpy as np
import pytest

from src.filtered_hyper.data import Sampling, TargetFunction, make_dataset
from src.filtered_hyper.errors import ConfigError, ContractViolation
from src.filtered_hyper.estimator import fit_ndfh
from src.filtered_hyper.expansion import SpectralExpansion
from src.filtered_hyper.experiments import (
    COLUMNS,
    ResultRow,
    fit_rate,
    kernel_l1_norms,
    l2_sq_error,
    localization_constant,
    noise_averaging_study,
    noise_floor_factor,
    pairwise_rates,
    parse_config,
    plateau_degree,
    read_csv,
    run_sweep,
    train_mse,
    weight_certificate_study,
    write_csv,
    write_plot_stub,
)
from src.filtered_hyper.experiments.metrics import monotone_within
from src.filtered_hyper.kernel import build_kernel
from src.filtered_hyper.quadrature import grid_rule

MINIMAL = """\
[experiment]
name = tiny
seed = 3

[target]
spec = wendland

[sweep]
degrees = 1, 2
noise = 0, 0.05
trials = 2
"""


def _rows(ns, errors, **extra):
    return [ResultRow(n=1, N=N, m=1, noise=0.0, seed=0, gen_l2sq=e, **extra) for N, e in zip(ns, errors)]


def test_fit_rate_recovers_power_law():
    ns = [100, 200, 400, 800, 1600]
    fit = fit_rate(_rows(ns, [7.0 * N**-3.0 for N in ns]))
    assert fit.slope == pytest.approx(-3.0, abs=1e-10)
    assert fit.intercept == pytest.approx(math.log(7.0), abs=1e-9)
    assert fit.used == 5 and fit.ok(-2.9)


def test_fit_rate_averages_and_excludes():
    rows = _rows([10, 10, 20, 40], [1.0, 3.0, 0.25, 0.0625])
    rows += _rows([80], [0.0])
    fit = fit_rate(rows + [ResultRow(n=1, N=160, m=1, noise=0.0, seed=0, skipped="infeasible")])
    assert fit.used == 3
    assert len(fit.excluded) == 2
    with pytest.raises(ContractViolation):
        fit_rate(_rows([10, 20], [1.0, 0.5]))


def test_pairwise_rates_and_monotone():
    assert pairwise_rates([1, 2, 4], [1.0, 0.125, 0.015625]) == pytest.approx([-3.0, -3.0])
    assert monotone_within([1.0, 0.5, 0.52, 0.3]) == (True, [])
    assert monotone_within([1.0, 0.5, 0.6]) == (False, [2])


def test_l2_error_of_zero_estimator():
    K = build_kernel(8)
    zero = SpectralExpansion(8, K.modes, np.zeros(len(K.modes), dtype=complex))
    value = l2_sq_error(zero, TargetFunction.of_mode(10, 0))
    assert value == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ContractViolation):
        l2_sq_error(zero, TargetFunction.of_mode(10, 0), resolution=16)


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_l2_error_is_stable_under_refinement(n):
    f = TargetFunction.wendland_wu()
    E = fit_ndfh(make_dataset(f, Sampling.grid(n)), n, grid_rule(n))
    value = l2_sq_error(E, f, strict=True)
    if n >= 4:
        fine = l2_sq_error(E, f, resolution=16 * n)
        assert abs(value - fine) / fine < 0.01


def test_train_mse_of_offset_data():
    D = make_dataset(TargetFunction.of_mode(1, 0), Sampling.grid(2))
    E = fit_ndfh(D, 2, grid_rule(2))
    assert train_mse(E, D) < 1e-20
    assert train_mse(E, D.with_values(D.values + 0.3)) == pytest.approx(0.09, rel=1e-8)


@pytest.mark.parametrize("n, n0", [(2, 2), (3, 3), (2, 3)])
def test_noise_floor_matches_operator(n, n0):
    D = make_dataset(TargetFunction.wendland_wu(), Sampling.grid(n0))
    Q = grid_rule(n0)
    columns = [fit_ndfh(D.with_values(e), n, Q).evaluate(D.points) for e in np.eye(D.size)]
    A = np.stack(columns, axis=1)
    expected = np.sum((np.eye(D.size) - A) ** 2) / D.size
    assert noise_floor_factor(n, n0) == pytest.approx(expected, abs=1e-9)


def test_plateau_degree_per_noise():
    rows = [
        ResultRow(n=n, N=9 * n * n, m=1, noise=s, seed=0, gen_l2sq=e)
        for s, errs in ((0.0, [1.0, 0.1, 0.01]), (0.1, [1.0, 0.2, 0.19]))
        for n, e in zip((2, 4, 8), errs)
    ]
    assert plateau_degree(rows) == {0.0: None, 0.1: 8}


def test_parse_minimal_config():
    cfg = parse_config(MINIMAL)
    assert cfg.degrees == [1, 2] and cfg.noise_levels == [0.0, 0.05]
    assert cfg.grid_resolution == 16
    assert cfg.trials_for(0.0) == 1 and cfg.trials_for(0.05) == 2
    assert "degrees = [1, 2]" in cfg.echo()


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        (MINIMAL + "colour = red\n", 12, "unknown key"),
        (MINIMAL.replace("degrees = 1, 2", "degrees = 2, 1"), 9, "degrees"),
        (MINIMAL.replace("seed = 3\n", ""), 1, "seed"),
        (MINIMAL + "resolution = 4\n", 12, "resolution"),
        ("degrees = 1\n", 1, "section"),
    ],
)
def test_config_errors_carry_line(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert fragment in str(info.value)


def test_sweep_is_thread_independent():
    cfg = parse_config(MINIMAL)
    one = run_sweep(cfg, threads=1)
    three = run_sweep(cfg, threads=3)
    assert len(one) == 2 * (1 + 2)
    strip = lambda rows: [(r.n, r.noise, r.seed, r.train_mse, r.gen_l2sq) for r in rows]
    assert strip(one) == strip(three)
    assert all(r.skipped is None for r in one)
    assert all(r.imag_resid < 1e-12 for r in one)


def test_sweep_csv_and_stub(tmp_path):
    cfg = parse_config(MINIMAL)
    rows = run_sweep(cfg, threads=2)
    path = write_csv(rows, tmp_path / "out" / "tiny.csv", cfg)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# filtered-hyper sweep, rng=")
    assert ",".join(COLUMNS) in lines
    back = read_csv(path)
    assert [(r.n, r.seed, r.gen_l2sq) for r in back] == [(r.n, r.seed, r.gen_l2sq) for r in rows]
    stub = write_plot_stub(path)
    assert stub.name == "tiny.csv.plot.py"
    assert "tiny.csv" in stub.read_text()


def test_infeasible_cells_are_skipped(tmp_path):
    cfg = parse_config(MINIMAL + "sampling = random\nsamples_per_shard = 2\n")
    rows = run_sweep(cfg, threads=1)
    assert rows and all(r.skipped for r in rows)
    path = write_csv(rows, tmp_path / "skip.csv", cfg)
    assert "# skipped n=1" in path.read_text()
    assert read_csv(path) == []


def test_localization_constant_is_finite():
    c4 = localization_constant(4, pairs=200, seed=1)
    c8 = localization_constant(8, pairs=200, seed=1)
    assert 0 < c4 < math.inf and 0 < c8 < math.inf


def test_kernel_l1_norms_stay_bounded():
    norms = kernel_l1_norms([4, 8, 16, 32])
    assert list(norms) == [4, 8, 16, 32]
    values = list(norms.values())
    assert all(1.0 <= v < 3.5 for v in values)
    assert max(values) / min(values) < 1.1


def test_certificate_study_counts_trials():
    study = weight_certificate_study(trials=4, size=200, n=2, seed=5)
    assert study.trials == 4 and len(study.residuals) == 4
    assert max(study.residuals) < 1e-8
    assert 0 <= study.pass_rate <= 1


def test_noise_averaging_decays():
    result = noise_averaging_study(n=2, trials=40, sigma=0.1, seed=2, checkpoints=(5, 10, 20, 40))
    assert result.checkpoints == [5, 10, 20, 40]
    assert -0.9 < result.slope < -0.2
