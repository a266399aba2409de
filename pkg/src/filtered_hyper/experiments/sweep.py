from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from ..config import FLAGS, RNG_ALGORITHM
from ..data import Sampling, make_dataset, merge_datasets, shard_interleaved, split_dataset
from ..errors import InfeasibleError, QuadratureConstructionError, RefinementError
from ..estimator import fit_dfh, fit_ndfh
from ..quadrature import grid_rule, solve_random_weights
from ..rng import derive_seed
from .config import ExperimentConfig
from .metrics import l2_sq_error, train_mse

logger = logging.getLogger(__name__)

COLUMNS = ("n", "N", "m", "noise", "seed", "train_mse", "gen_l2sq", "imag_resid", "wall_ms")


@dataclass
class ResultRow:
    n: int
    N: int
    m: int
    noise: float
    seed: int
    train_mse: float = 0.0
    gen_l2sq: float = 0.0
    imag_resid: float = 0.0
    wall_ms: float = 0.0
    skipped: Optional[str] = None

    def as_csv(self) -> List[str]:
        return [
            str(self.n),
            str(self.N),
            str(self.m),
            repr(self.noise),
            str(self.seed),
            format(self.train_mse, ".17g"),
            format(self.gen_l2sq, ".17g"),
            format(self.imag_resid, ".17g"),
            f"{self.wall_ms:.3f}",
        ]


Cell = Tuple[int, int, float, int]  # (n, noise index, noise level, trial seed)


def sweep_cells(cfg: ExperimentConfig) -> List[Cell]:
    cells: List[Cell] = []
    for n in cfg.degrees:
        for i, level in enumerate(cfg.noise_levels):
            for trial in range(cfg.trials_for(level)):
                seed = derive_seed(cfg.seed, n, i, trial) if cfg.seed is not None else 0
                cells.append((n, i, level, seed))
    return cells


def _fit_grid(cfg: ExperimentConfig, n: int, level: float, seed: int):
    target = cfg.target_function()
    noise = cfg.noise_model(level, derive_seed(seed, 0))
    if cfg.servers == 1:
        D = make_dataset(target, Sampling.grid(n), noise)
        return fit_ndfh(D, n, grid_rule(n)), D
    shards = shard_interleaved(target, n, cfg.servers, noise=noise)
    rules = [grid_rule(n, d.sampling.shift) for d in shards]
    return fit_dfh(shards, n, rules, cfg.servers, threads=1), merge_datasets(shards)


def _fit_random(cfg: ExperimentConfig, n: int, level: float, seed: int):
    target = cfg.target_function()
    per_shard = cfg.samples_per_shard or 9 * n * n
    noise = cfg.noise_model(level, derive_seed(seed, 2))
    D = make_dataset(target, Sampling.random(derive_seed(seed, 1), cfg.servers * per_shard), noise)
    shards = split_dataset(D, cfg.servers)
    degree = n if cfg.solve_degree == "n" else 3 * n - 1
    rules = [solve_random_weights(s.points, degree, cfg.servers, seed=seed) for s in shards]
    if cfg.servers == 1:
        return fit_ndfh(D, n, rules[0]), D
    return fit_dfh(shards, n, rules, cfg.servers, threads=1), D


def run_cell(cfg: ExperimentConfig, n: int, level: float, seed: int) -> ResultRow:
    m = cfg.servers
    per_shard = 9 * n * n if cfg.sampling == "grid" else (cfg.samples_per_shard or 9 * n * n)
    row = ResultRow(n=n, N=m * per_shard, m=m, noise=level, seed=seed)
    start = time.perf_counter()
    try:
        fit = _fit_grid if cfg.sampling == "grid" else _fit_random
        E, D = fit(cfg, n, level, seed)
        row.train_mse = train_mse(E, D)
        row.gen_l2sq = l2_sq_error(E, cfg.target_function(), cfg.grid_resolution, strict=cfg.strict)
        row.imag_resid = E.imaginary_residual(D.points)
    except (InfeasibleError, QuadratureConstructionError, RefinementError) as exc:
        row.skipped = str(exc)
        logger.warning("skipped cell n=%d noise=%g seed=%d: %s", n, level, seed, exc)
    row.wall_ms = 1000.0 * (time.perf_counter() - start)
    logger.debug("cell n=%d noise=%g done in %.1f ms", n, level, row.wall_ms)
    return row


def run_sweep(cfg: ExperimentConfig, threads: Optional[int] = None) -> List[ResultRow]:
    """All (n, noise, trial) cells, returned in that order whatever the worker count."""
    cells = sweep_cells(cfg)
    workers = max(1, min(threads or cfg.threads or FLAGS.threads, len(cells)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: run_cell(cfg, c[0], c[2], c[3]), cells))


def write_csv(rows: Sequence[ResultRow], path: Path, cfg: ExperimentConfig) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# filtered-hyper sweep, rng={RNG_ALGORITHM}\n")
        for line in cfg.echo():
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in rows:
            if row.skipped:
                fh.write(f"# skipped n={row.n} noise={row.noise!r} seed={row.seed}: {row.skipped}\n")
            else:
                writer.writerow(row.as_csv())
    return path


def read_csv(path: Path) -> List[ResultRow]:
    with Path(path).open(encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        return [
            ResultRow(
                n=int(r["n"]),
                N=int(r["N"]),
                m=int(r["m"]),
                noise=float(r["noise"]),
                seed=int(r["seed"]),
                train_mse=float(r["train_mse"]),
                gen_l2sq=float(r["gen_l2sq"]),
                imag_resid=float(r["imag_resid"]),
                wall_ms=float(r["wall_ms"]),
            )
            for r in reader
        ]


PLOT_STUB = '''"""Load {csv_name} and group the series by noise level; plotting is left to you."""
import csv
from collections import defaultdict
from pathlib import Path

HERE = Path(__file__).resolve().parent
series = defaultdict(list)
with (HERE / "{csv_name}").open() as fh:
    for row in csv.DictReader(line for line in fh if not line.startswith("#")):
        series[float(row["noise"])].append((int(row["N"]), float(row["gen_l2sq"]), float(row["train_mse"])))

for noise, points in sorted(series.items()):
    points.sort()
    print(f"noise={{noise}}: {{len(points)}} rows")
    # e.g. plt.loglog([p[0] for p in points], [p[1] for p in points], label=f"noise={{noise}}")
'''


def write_plot_stub(csv_path: Path) -> Path:
    csv_path = Path(csv_path)
    stub = csv_path.with_name(csv_path.name + ".plot.py")
    stub.write_text(PLOT_STUB.format(csv_name=csv_path.name), encoding="utf-8")
    return stub
