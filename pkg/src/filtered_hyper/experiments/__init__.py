from .config import ExperimentConfig, load_config, parse_config
from .metrics import RateFit, fit_rate, l2_sq_error, noise_floor_factor, pairwise_rates, plateau_degree, train_mse
from .studies import kernel_l1_norms, localization_constant, noise_averaging_study, weight_certificate_study
from .sweep import COLUMNS, ResultRow, read_csv, run_sweep, write_csv, write_plot_stub

__all__ = [
    "COLUMNS",
    "ExperimentConfig",
    "RateFit",
    "ResultRow",
    "fit_rate",
    "kernel_l1_norms",
    "l2_sq_error",
    "load_config",
    "localization_constant",
    "noise_averaging_study",
    "noise_floor_factor",
    "pairwise_rates",
    "parse_config",
    "plateau_degree",
    "read_csv",
    "run_sweep",
    "train_mse",
    "weight_certificate_study",
    "write_csv",
    "write_plot_stub",
]
