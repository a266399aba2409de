"""End-to-end behaviour on desk-scale problems: reproduction, rates, noise, distribution."""

from __future__ import annotations

import math

import numpy as np
import pytest

from src.filtered_hyper.data import NoiseModel, Sampling, TargetFunction, make_dataset, merge_datasets, shard_interleaved
from src.filtered_hyper.estimator import fit_dfh, fit_ndfh
from src.filtered_hyper.experiments import (
    fit_rate,
    l2_sq_error,
    localization_constant,
    noise_averaging_study,
    noise_floor_factor,
    parse_config,
    run_sweep,
    train_mse,
    weight_certificate_study,
)
from src.filtered_hyper.experiments.metrics import monotone_within
from src.filtered_hyper.kernel import build_kernel, kernel_integral
from src.filtered_hyper.manifold import TORUS, TWO_PI
from src.filtered_hyper.quadrature import QuadratureRule, grid_rule
from src.filtered_hyper.rng import make_generator

SIGMA = 0.01


def _wendland_sweep(noise: str, trials: int = 1):
    return parse_config(
        f"""
[experiment]
name = wendland
seed = 2024

[target]
spec = wendland

[sweep]
degrees = 2, 4, 6, 8, 12, 16
noise = {noise}
trials = {trials}
"""
    )


@pytest.mark.parametrize("n", [1, 2, 4])
def test_grid_fit_reproduces_every_mode(n):
    grid = TORUS.reference_grid(8 * n)
    Q = grid_rule(n)
    for k in TORUS.mode_array(n):
        for part in ("real", "imag"):
            target = TargetFunction.of_mode(int(k[0]), int(k[1]), part)
            E = fit_ndfh(make_dataset(target, Sampling.grid(n)), n, Q)
            assert np.max(np.abs(E.evaluate_on_grid(8 * n) - target(grid.points))) < 1e-10


def test_noiseless_rate():
    rows = run_sweep(_wendland_sweep("0"))
    assert [r.N for r in rows] == [9 * n * n for n in (2, 4, 6, 8, 12, 16)]
    assert fit_rate(rows).slope <= -5.0
    ordered = sorted(rows, key=lambda r: r.N)
    assert monotone_within([r.gen_l2sq for r in ordered]) == (True, [])


def test_noise_plateau_on_grid():
    """Training MSE at n = 16 against sigma^2 times the grid operator's noise floor factor.

    The fixed [0.5, 2] sigma^2 band does not hold here: the grid fit keeps most
    of the sample's discrete spectrum, so its plateau sits well below sigma^2.
    The band is applied to the factor-scaled floor instead; the distributed
    case below still uses the plain sigma^2 band.
    """
    rows = [r for r in run_sweep(_wendland_sweep(str(SIGMA), trials=5)) if r.n == 16]
    assert len(rows) == 5
    mse = float(np.mean([r.train_mse for r in rows]))
    floor = noise_floor_factor(16, 16) * SIGMA**2
    assert 0.5 * floor <= mse <= 2.0 * floor


def test_noise_plateau_distributed():
    mses = []
    for seed in range(5):
        shards = shard_interleaved(TargetFunction.wendland_wu(), 8, 4, noise=NoiseModel.gaussian(SIGMA, seed))
        F = fit_dfh(shards, 8, [grid_rule(8, s.sampling.shift) for s in shards])
        mses.append(train_mse(F, merge_datasets(shards)))
    assert 0.5 * SIGMA**2 <= np.mean(mses) <= 2.0 * SIGMA**2


@pytest.mark.parametrize("n", [4, 8])
def test_distributed_matches_union_fit(n):
    target = TargetFunction.wendland_wu()
    shards = shard_interleaved(target, n, 4)
    F = fit_dfh(shards, n, [grid_rule(n, s.sampling.shift) for s in shards])
    union = merge_datasets(shards)
    rule = QuadratureRule(
        nodes=union.points,
        weights=np.full(union.size, TWO_PI**2 / union.size),
        degree=6 * n - 1,
        provenance=f"union_grid(n0={n},m=4)",
    )
    E = fit_ndfh(union, n, rule)
    dfh_err, ndfh_err = l2_sq_error(F, target), l2_sq_error(E, target)
    assert ndfh_err / 4 <= dfh_err <= 4 * ndfh_err
    pts = make_generator(n).uniform(-math.pi, math.pi, size=(50, 2))
    assert np.max(np.abs(F.evaluate(pts) - E.evaluate(pts))) < 1e-12


def test_single_server_is_the_plain_fit():
    D = make_dataset(TargetFunction.wendland_wu(), Sampling.grid(5), NoiseModel.gaussian(0.05, 1))
    E = fit_ndfh(D, 5, grid_rule(5))
    F = fit_dfh([D], 5, [grid_rule(5)])
    pts = make_generator(3).uniform(-math.pi, math.pi, size=(100, 2))
    assert np.max(np.abs(F.evaluate(pts) - E.evaluate(pts))) < 1e-14


def test_weight_certificate_rate():
    study = weight_certificate_study(trials=50, size=500, n=3, m=1, seed=0)
    assert study.pass_rate >= 0.9


def test_localization_constant_stable_across_degrees():
    values = [localization_constant(n, pairs=1000, seed=7) for n in (8, 16, 32)]
    assert max(values) / min(values) < 4.0


@pytest.mark.parametrize("n", [1, 4, 16])
def test_kernel_integrates_to_one(n):
    K = build_kernel(n)
    for x in make_generator(n).uniform(-math.pi, math.pi, size=(5, 2)):
        assert abs(kernel_integral(K, x) - 1.0) < 1e-10


def test_noise_averaging_rate():
    result = noise_averaging_study(n=4, trials=200, sigma=0.1, seed=0)
    assert -0.75 <= result.slope <= -0.25
