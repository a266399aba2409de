import sys
from pathlib import Path

# Add src to path
sys.path.append(str(Path(__file__).parent.parent / "src"))

from filtered_hyper.experiments import fit_rate, load_config, noise_floor_factor, plateau_degree, run_sweep

CONFIG = Path(__file__).parent.parent / "configs" / "grid_sweep.ini"


def check_noiseless_rate(rows):
    print("Checking noiseless rate...")
    clean = [r for r in rows if r.noise == 0 and not r.skipped]
    fit = fit_rate(clean)
    print(f"slope of gen_l2sq vs N: {fit.slope:.2f} over {fit.used} sizes")
    if fit.slope > -5.0:
        print("ERROR: noiseless rate is slower than N^-5")
        sys.exit(1)


def check_plateau(rows):
    print("Checking noise plateau...")
    top = max(r.n for r in rows)
    for level in sorted({r.noise for r in rows if r.noise > 0}):
        cell = [r.train_mse for r in rows if r.noise == level and r.n == top and not r.skipped]
        mse = sum(cell) / len(cell)
        floor = noise_floor_factor(top, top) * level**2
        print(f"noise={level:g}: train MSE {mse:.3e}, expected about {floor:.3e}")
        if not 0.5 * floor <= mse <= 2.0 * floor:
            print("ERROR: training error is off the noise floor")
            sys.exit(1)
    print(f"plateau degrees: {plateau_degree(rows)}")


if __name__ == "__main__":
    rows = run_sweep(load_config(CONFIG))
    check_noiseless_rate(rows)
    check_plateau(rows)
    print("Rates OK.")
