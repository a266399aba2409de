import sys
from pathlib import Path

# Add src to path
sys.path.append(str(Path(__file__).parent.parent / "src"))

from filtered_hyper.data import NoiseModel, TargetFunction, merge_datasets, shard_interleaved
from filtered_hyper.estimator import fit_dfh, server_count_bound
from filtered_hyper.experiments import l2_sq_error, train_mse
from filtered_hyper.quadrature import grid_rule


def fit(n, m, noise):
    shards = shard_interleaved(TargetFunction.wendland_wu(), n, m, noise=noise)
    E = fit_dfh(shards, n, [grid_rule(n, s.sampling.shift) for s in shards], m)
    return E, merge_datasets(shards)


def check_parity():
    print("Checking distributed parity...")
    target = TargetFunction.wendland_wu()
    for n in (4, 8):
        single, _ = fit(n, 1, NoiseModel.none())
        split, _ = fit(n, 4, NoiseModel.none())
        a, b = l2_sq_error(single, target), l2_sq_error(split, target)
        print(f"n={n}: m=1 {a:.3e}, m=4 {b:.3e}")
        if b > 4 * a:
            print("ERROR: distributed fit is more than 4x worse")
            sys.exit(1)


def check_noise():
    print("Checking distributed noise level...")
    sigma = 0.01
    E, union = fit(8, 4, NoiseModel.gaussian(sigma, 5))
    mse = train_mse(E, union)
    print(f"train MSE {mse:.3e} (sigma^2 = {sigma**2:.1e})")
    if not 0.5 * sigma**2 <= mse <= 2 * sigma**2:
        print("ERROR: training error is off sigma^2")
        sys.exit(1)


if __name__ == "__main__":
    check_parity()
    check_noise()
    print(f"server bound for N=10000, r=6: m <= {server_count_bound(10000, 6)}")
    print("Distributed OK.")
