from __future__ import annotations
import math
from fractions import Fraction

import numpy as np
import pytest

from src.filtered_hyper.data import NoiseModel, Sampling, TargetFunction, make_dataset, shard_interleaved, split_dataset
from src.filtered_hyper.errors import ContractViolation
from src.filtered_hyper.estimator import (
    DfhEstimator,
    evaluate,
    expected_rate,
    fit_dfh,
    fit_ndfh,
    server_count_bound,
    shard_size_condition,
    suggest_degree_window,
)
from src.filtered_hyper.manifold import TORUS
from src.filtered_hyper.quadrature import QuadratureRule, grid_rule, solve_random_weights
from src.filtered_hyper.rng import make_generator


def _random_points(seed: int, size: int) -> np.ndarray:
    return make_generator(seed).uniform(-math.pi, math.pi, size=(size, 2))


def test_reproduces_low_mode():
    target = TargetFunction.of_mode(1, 0)
    D = make_dataset(target, Sampling.grid(2))
    E = fit_ndfh(D, 2, grid_rule(2))
    grid = TORUS.reference_grid(16)
    assert np.max(np.abs(E.evaluate_on_grid(16) - target(grid.points))) < 1e-10
    assert np.max(np.abs(E.evaluate(grid.points) - target(grid.points))) < 1e-10


def test_zero_data_gives_zero_estimator():
    D = make_dataset(TargetFunction.wendland_wu(), Sampling.grid(2)).with_values(np.zeros(36))
    E = fit_ndfh(D, 2, grid_rule(2))
    assert np.all(E.coefficients == 0)


def test_mode_outside_support_vanishes():
    D = make_dataset(TargetFunction.of_mode(5, 0), Sampling.grid(4))
    E = fit_ndfh(D, 1, grid_rule(4))
    assert math.sqrt(np.sum(np.abs(E.coefficients) ** 2)) < 1e-10


def test_node_mismatch_rejected():
    D = make_dataset(TargetFunction.wendland_wu(), Sampling.grid(2))
    with pytest.raises(ContractViolation):
        fit_ndfh(D, 2, grid_rule(2, shift=(0.1, 0.0)))
    with pytest.raises(ContractViolation):
        fit_ndfh(D, 0, grid_rule(2))


def test_linearity_in_values():
    D = make_dataset(TargetFunction.wendland_wu(), Sampling.grid(3))
    rng = np.random.default_rng(2)
    a, b = rng.normal(size=D.size), rng.normal(size=D.size)
    Q = grid_rule(3)
    lhs = fit_ndfh(D.with_values(2.5 * a - 0.75 * b), 3, Q).coefficients
    rhs = 2.5 * fit_ndfh(D.with_values(a), 3, Q).coefficients - 0.75 * fit_ndfh(D.with_values(b), 3, Q).coefficients
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_coefficient_and_kernel_sum_agree():
    D = make_dataset(TargetFunction.wendland_wu(), Sampling.random(8, 200), NoiseModel.gaussian(0.05, 3))
    rule = solve_random_weights(D.points, 3, 1)
    E = fit_ndfh(D, 3, rule)
    pts = _random_points(21, 100)
    assert np.max(np.abs(E.evaluate(pts) - E.evaluate_kernel_sum(pts))) < 1e-10


def test_imaginary_residual_small_for_real_data():
    D = make_dataset(TargetFunction.wendland_wu(), Sampling.grid(4))
    E = fit_ndfh(D, 4, grid_rule(4))
    assert E.imaginary_residual(_random_points(1, 200)) < 1e-12


def test_dfh_single_shard_matches_ndfh():
    D = make_dataset(TargetFunction.wendland_wu(), Sampling.grid(3))
    E = fit_ndfh(D, 3, grid_rule(3))
    F = fit_dfh([D], 3, [grid_rule(3)])
    pts = _random_points(4, 50)
    assert np.array_equal(F.evaluate(pts), E.evaluate(pts))
    assert np.array_equal(evaluate(F, pts), evaluate(E, pts))


def test_dfh_identical_shards_equal_either():
    D = make_dataset(TargetFunction.wendland_wu(), Sampling.grid(2))
    E = fit_ndfh(D, 2, grid_rule(2))
    F = DfhEstimator([E, E], [36, 36])
    pts = _random_points(5, 50)
    assert np.array_equal(F.evaluate(pts), E.evaluate(pts))


def test_synthesis_weights_exact():
    D = make_dataset(TargetFunction.wendland_wu(), Sampling.grid(1))
    E = fit_ndfh(D, 1, grid_rule(1))
    F = DfhEstimator([E, E], [10, 30])
    assert F.synthesis_weights == [Fraction(1, 4), Fraction(3, 4)]
    assert sum(F.synthesis_weights) == 1


def test_dfh_zero_values():
    shards = [s.with_values(np.zeros(s.size)) for s in shard_interleaved(TargetFunction.wendland_wu(), 2, 4)]
    rules = [grid_rule(2, s.sampling.shift) for s in shards]
    F = fit_dfh(shards, 2, rules)
    assert np.all(F.evaluate(_random_points(2, 30)) == 0)


def test_dfh_convex_combination_pointwise():
    shards = shard_interleaved(TargetFunction.wendland_wu(), 3, 4, noise=NoiseModel.gaussian(0.05, 8))
    rules = [grid_rule(3, s.sampling.shift) for s in shards]
    F = fit_dfh(shards, 3, rules, threads=3)
    pts = _random_points(6, 200)
    per_shard = np.stack([e.evaluate(pts) for e in F.shards])
    values = F.evaluate(pts)
    assert np.all(per_shard.min(axis=0) <= values) and np.all(values <= per_shard.max(axis=0))


def test_dfh_independent_of_thread_count():
    shards = shard_interleaved(TargetFunction.wendland_wu(), 2, 4, noise=NoiseModel.gaussian(0.05, 8))
    rules = [grid_rule(2, s.sampling.shift) for s in shards]
    pts = _random_points(7, 40)
    one = fit_dfh(shards, 2, rules, threads=1).evaluate(pts)
    four = fit_dfh(shards, 2, rules, threads=4).evaluate(pts)
    assert np.array_equal(one, four)


def test_dfh_degenerate_shard_flagged():
    D = make_dataset(TargetFunction.wendland_wu(), Sampling.random(3, 80))
    a, b = split_dataset(D, 2)
    good = solve_random_weights(a.points, 1, 2)
    dead = QuadratureRule(
        nodes=b.points,
        weights=np.zeros(b.size),
        degree=1,
        provenance="solved_random(n=1)",
        measure="probability",
        degenerate=True,
        gate_m=2,
    )
    F = fit_dfh([a, b], 1, [good, dead], 2)
    assert F.degenerate_shards == [1]
    assert np.all(F.shards[1].coefficients == 0)


def test_dfh_rejects_wrong_gate_and_coarse_grid():
    D = make_dataset(TargetFunction.wendland_wu(), Sampling.random(3, 80))
    a, b = split_dataset(D, 2)
    rules = [solve_random_weights(s.points, 1, 1) for s in (a, b)]
    with pytest.raises(ContractViolation):
        fit_dfh([a, b], 1, rules, 2)
    G = make_dataset(TargetFunction.wendland_wu(), Sampling.grid(1))
    with pytest.raises(ContractViolation):
        fit_dfh([G], 2, [grid_rule(1)])
    with pytest.raises(ContractViolation):
        fit_dfh([G], 1, [grid_rule(1)], m=0)


def test_server_count_bound_examples():
    assert server_count_bound(10000, 6, 2, "noisy_det") == 2682
    assert server_count_bound(10000, 6, 2, "noisy_random", tau=1) == math.floor(10000 ** (5.5 / 7))
    assert server_count_bound(10000, math.inf, 2, "noisy_det") == 10000
    assert server_count_bound(10000, 6, 2, "clean_det") == 10000
    assert server_count_bound(10000, 6, 2, "clean_random", tau=1, n=2) == 1250


def test_server_count_bound_domain():
    with pytest.raises(ContractViolation):
        server_count_bound(100, 1.0, 2, "noisy_det")
    with pytest.raises(ContractViolation):
        server_count_bound(100, 6, 2, "noisy_random", tau=12)
    with pytest.raises(ContractViolation):
        server_count_bound(100, 6, 2, "sideways")


def test_rate_table_and_helpers():
    assert expected_rate("clean_det", 6, 2) == -3
    assert expected_rate("noisy_random", 6, 2) == pytest.approx(-6 / 7)
    assert expected_rate("clean_random", 6, 2, squared=True) == -6
    assert shard_size_condition([2500] * 4, 6, 2)
    assert not shard_size_condition([1, 9999], 6, 2)
    assert suggest_degree_window(10000, 6, 2) == (1, 1)
    assert suggest_degree_window(10000, 6, 2, c3=30) == (10, 28)
