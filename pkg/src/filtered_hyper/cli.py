from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional

import click
import numpy as np
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from .config import FLAGS, OUTPUT_DIR, RNG_ALGORITHM
from .data import NoiseModel, Sampling, make_dataset, merge_datasets, parse_target, shard_interleaved, split_dataset
from .errors import ContractViolation, FilteredHyperError, QuadratureConstructionError
from .estimator import fit_dfh, fit_ndfh
from .filter import DEFAULT_FILTER, boundary_smoothness_report, smoothness_class
from .manifold import reduce_angles
from .quadrature import grid_rule, solve_random_weights, verify_exactness
from .rng import make_generator
from .serialization import read_dataset, read_estimator, read_rule, write_dataset, write_estimator

console = Console()

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SKIPPED = 0, 1, 2, 3
PASS_THRESHOLD = 1e-10


def fail(reason: str, code: int = EXIT_USAGE) -> None:
    click.echo(f"error: {reason}", err=True)
    raise SystemExit(code)


def echo_config(title: str, items: dict, prefix: str = "") -> None:
    """Print the resolved parameters of a run; ``prefix`` keeps CSV output parseable."""
    console.print(f"{prefix}[bold]{title}[/bold]", highlight=False)
    for key, value in items.items():
        console.print(f"{prefix}  {key} = {value}", highlight=False, soft_wrap=True)


@click.group()
@click.option("--log-level", type=str, default=None, help="Logging level (default: FHYPER_LOG_LEVEL)")
@click.option("--threads", type=int, default=None, help="Worker cap for shard fits and sweep cells")
def main(log_level: Optional[str], threads: Optional[int]) -> None:
    """Filtered hyperinterpolation on the 2-torus: fit, evaluate, verify and sweep."""
    if threads is not None:
        if threads < 1:
            fail("threads must be ≥ 1")
        FLAGS.threads = threads
    level = (log_level or FLAGS.log_level).upper()
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@main.command("fit")
@click.option("--n", "n", type=int, required=True, help="Degree n")
@click.option("--servers", "m", type=int, default=1, show_default=True, help="Server count m")
@click.option("--target", type=str, default="wendland", show_default=True, help="wendland[:x1,x2] or mode:k1,k2[,imag]")
@click.option("--dataset", "dataset_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Read data instead of generating it")
@click.option("--rule", "rule_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Quadrature rule for --dataset (m = 1)")
@click.option("--grid/--random", "use_grid", default=True, help="Grid (default) or uniform random sampling")
@click.option("--n0", type=int, default=None, help="Grid base size per shard (default: n)")
@click.option("--samples", type=int, default=None, help="Random points per shard (default: 9 n^2)")
@click.option("--noise", type=float, default=0.0, show_default=True, help="Noise level (sigma or bound)")
@click.option("--noise-kind", type=click.Choice(["gaussian", "bounded_uniform"]), default="gaussian", show_default=True)
@click.option("--seed", type=int, default=None, help="Master seed; required for noisy or random data")
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="Estimator file")
@click.option("--save-data", type=click.Path(dir_okay=False), default=None, help="Also write the (union) dataset")
def cmd_fit(
    n: int,
    m: int,
    target: str,
    dataset_path: Optional[str],
    rule_path: Optional[str],
    use_grid: bool,
    n0: Optional[int],
    samples: Optional[int],
    noise: float,
    noise_kind: str,
    seed: Optional[int],
    output: Optional[str],
    save_data: Optional[str],
) -> None:
    """Fit an NDFH (m = 1) or DFH estimator and write it to disk."""
    if m < 1:
        fail("m must be ≥ 1")
    if n < 1:
        fail("n must be ≥ 1")
    if noise < 0:
        fail("noise must be ≥ 0")
    if seed is None and (noise > 0 or (not use_grid and dataset_path is None)):
        fail("--seed is required for noisy or randomly sampled data")
    out = Path(output) if output else OUTPUT_DIR / "estimator.txt"
    echo_config(
        "fit",
        {
            "n": n,
            "m": m,
            "target": dataset_path or target,
            "sampling": "file" if dataset_path else ("grid" if use_grid else "random"),
            "n0": n0 or n,
            "noise": f"{noise_kind}({noise})" if noise > 0 else "none",
            "seed": seed,
            "rng": RNG_ALGORITHM,
            "output": out,
        },
    )
    try:
        if dataset_path:
            D = read_dataset(dataset_path)
            if m == 1:
                rule = read_rule(rule_path) if rule_path else solve_random_weights(D.points, n, 1)
                E, union = fit_ndfh(D, n, rule), D
            else:
                shards = split_dataset(D, m)
                rules = [solve_random_weights(s.points, n, m) for s in shards]
                E, union = fit_dfh(shards, n, rules, m), D
        else:
            E, union = _fit_generated(n, m, parse_target(target), use_grid, n0 or n, samples, noise, noise_kind, seed)
    except (ContractViolation, QuadratureConstructionError) as exc:
        fail(str(exc))
    out.parent.mkdir(parents=True, exist_ok=True)
    write_estimator(E, out)
    if save_data:
        write_dataset(union, save_data)
    console.print(f"[green]wrote[/green] {out} ({len(E.modes) if m == 1 else len(E.shards[0].modes)} modes)")


def _fit_generated(n, m, target, use_grid, n0, samples, noise, noise_kind, seed):
    model = NoiseModel(kind=noise_kind, level=noise, seed=seed) if noise > 0 else NoiseModel.none()
    if use_grid:
        if m == 1:
            D = make_dataset(target, Sampling.grid(n0), model)
            return fit_ndfh(D, n, grid_rule(n0)), D
        shards = shard_interleaved(target, n0, m, noise=model)
        rules = [grid_rule(n0, d.sampling.shift) for d in shards]
        return fit_dfh(shards, n, rules, m), merge_datasets(shards)
    size = samples or 9 * n * n
    D = make_dataset(target, Sampling.random(seed, m * size), model)
    shards = split_dataset(D, m)
    rules = [solve_random_weights(s.points, n, m, seed=seed) for s in shards]
    if m == 1:
        return fit_ndfh(D, n, rules[0]), D
    return fit_dfh(shards, n, rules, m), D


def _read_points(path: str) -> np.ndarray:
    rows: List[List[float]] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split(",")
        try:
            rows.append([float(parts[0]), float(parts[1])])
        except (ValueError, IndexError):
            fail(f"{path}:{lineno}: expected x1,x2")
    return np.array(rows, dtype=float).reshape(len(rows), 2)


@main.command("eval")
@click.option("--estimator", "estimator_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--points", "points_path", type=click.Path(exists=True, dir_okay=False), default=None, help="CSV of x1,x2 rows")
@click.option("--random", "random_count", type=int, default=None, help="Evaluate at this many uniform random points")
@click.option("--seed", type=int, default=None, help="Seed for --random")
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="Write x1,x2,value rows here instead of stdout")
def cmd_eval(
    estimator_path: str, points_path: Optional[str], random_count: Optional[int], seed: Optional[int], output: Optional[str]
) -> None:
    """Evaluate a stored estimator (real part) at points."""
    if (points_path is None) == (random_count is None):
        fail("give exactly one of --points or --random")
    try:
        E = read_estimator(estimator_path)
    except ContractViolation as exc:
        fail(str(exc))
    if points_path:
        pts = _read_points(points_path)
    else:
        if seed is None:
            fail("--seed is required with --random")
        if random_count < 1:
            fail("--random must be ≥ 1")
        pts = reduce_angles(make_generator(seed).uniform(-np.pi, np.pi, size=(random_count, 2)))
    echo_config(
        "eval",
        {
            "estimator": estimator_path,
            "points": points_path or f"random({random_count})",
            "seed": seed,
            "rng": RNG_ALGORITHM,
            "output": output or "stdout",
        },
        prefix="# ",
    )
    values = E.evaluate(pts)
    lines = [f"{format(x[0], '.17g')},{format(x[1], '.17g')},{format(v, '.17g')}" for x, v in zip(pts, values)]
    if output:
        Path(output).write_text("\n".join(lines) + "\n", encoding="utf-8")
        console.print(f"[green]wrote[/green] {output} ({len(lines)} points)")
    else:
        click.echo("\n".join(lines))


@main.command("verify-quadrature")
@click.option("--degree", type=int, required=True, help="Check all modes with |k| <= degree")
@click.option("--rule", "rule_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--grid", "grid_n0", type=int, default=None, help="Generate grid_rule(n0)")
@click.option("--random", "random_count", type=int, default=None, help="Solve weights for this many random points")
@click.option("--solve-degree", type=int, default=None, help="Moment degree for --random (default: --degree)")
@click.option("--servers", "m", type=int, default=1, show_default=True, help="Gate m for --random")
@click.option("--seed", type=int, default=None)
def cmd_verify_quadrature(
    degree: int,
    rule_path: Optional[str],
    grid_n0: Optional[int],
    random_count: Optional[int],
    solve_degree: Optional[int],
    m: int,
    seed: Optional[int],
) -> None:
    """Report the maximal moment residual of a rule; exit 1 above 1e-10."""
    if sum(v is not None for v in (rule_path, grid_n0, random_count)) != 1:
        fail("give exactly one of --rule, --grid or --random")
    try:
        if rule_path:
            rule = read_rule(rule_path)
        elif grid_n0 is not None:
            rule = grid_rule(grid_n0)
        else:
            if seed is None:
                fail("--seed is required with --random")
            pts = reduce_angles(make_generator(seed).uniform(-np.pi, np.pi, size=(random_count, 2)))
            rule = solve_random_weights(pts, degree if solve_degree is None else solve_degree, m, seed=seed)
        report = verify_exactness(rule, degree, tol=PASS_THRESHOLD)
    except (ContractViolation, QuadratureConstructionError) as exc:
        fail(str(exc))
    echo_config("verify-quadrature", {"rule": rule.provenance, "N": rule.size, "degree": degree, "threshold": PASS_THRESHOLD})
    console.print(f"max residual: {report.max_residual:.3e}", highlight=False)
    if rule.negative_weight_count():
        console.print(f"[yellow]negative weights: {rule.negative_weight_count()}[/yellow]")
    if report.ok:
        console.print("[green]PASS[/green]")
        return
    shown = ", ".join(f"({a},{b})" for a, b in report.failing_modes[:20])
    more = "" if len(report.failing_modes) <= 20 else f" (+{len(report.failing_modes) - 20} more)"
    console.print(f"[red]FAIL[/red] aliased modes: {shown}{more}", highlight=False, soft_wrap=True)
    raise SystemExit(EXIT_FAIL)


@main.command("sweep")
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="CSV path (overrides the config)")
@click.option("--strict", is_flag=True, default=False, help="Exit 3 when any cell is skipped")
@click.option("--no-plot-stub", is_flag=True, default=False)
def cmd_sweep(config_path: str, output: Optional[str], strict: bool, no_plot_stub: bool) -> None:
    """Run a convergence sweep described by an INI config file."""
    from .experiments import fit_rate, load_config, plateau_degree, run_sweep, write_csv, write_plot_stub

    try:
        cfg = load_config(Path(config_path))
    except ContractViolation as exc:
        fail(str(exc))
    if strict:
        cfg = cfg.model_copy(update={"strict": True})
    out = Path(output) if output else (cfg.output or OUTPUT_DIR / f"{cfg.name}.csv")
    echo_config("sweep", {line.split(" = ")[0]: line.split(" = ", 1)[1] for line in cfg.echo()})
    try:
        rows = run_sweep(cfg)
    except FilteredHyperError as exc:
        fail(str(exc))
    write_csv(rows, out, cfg)
    if not no_plot_stub:
        write_plot_stub(out)
    done = [r for r in rows if not r.skipped]
    skipped = [r for r in rows if r.skipped]

    table = Table(title=f"{cfg.name}: {len(done)} rows, {len(skipped)} skipped")
    for col in ("n", "N", "m", "noise", "train_mse", "gen_l2sq"):
        table.add_column(col, justify="right")
    for r in done:
        table.add_row(str(r.n), str(r.N), str(r.m), f"{r.noise:g}", f"{r.train_mse:.3e}", f"{r.gen_l2sq:.3e}")
    console.print(table)
    clean = [r for r in done if r.noise == 0]
    if len({r.N for r in clean}) >= 3:
        rate = fit_rate(clean)
        console.print(f"noiseless slope of gen_l2sq vs N: {rate.slope:.2f}", highlight=False)
    for level, n_stop in plateau_degree(done).items():
        if level > 0 and n_stop is not None:
            console.print(f"noise {level:g}: convergence stops at n = {n_stop}", highlight=False)
    console.print(f"[green]wrote[/green] {out}")
    if strict and skipped:
        click.echo(f"error: {len(skipped)} skipped cells", err=True)
        raise SystemExit(EXIT_SKIPPED)


@main.command("filter-report")
@click.option("--max-order", type=int, default=6, show_default=True)
@click.option("--step", type=float, default=1e-3, show_default=True)
@click.option("--tol", type=float, default=1e-5, show_default=True)
@click.option("--kernel-degrees", type=str, default="4,8,16,32", show_default=True, help="Degrees n for the L1 norm of K_n")
def cmd_filter_report(max_order: int, step: float, tol: float, kernel_degrees: str) -> None:
    """One-sided derivative gaps of the default filter at t = 1 and t = 2, and L1 norms of K_n."""
    from .experiments import kernel_l1_norms

    try:
        degrees = [int(v) for v in kernel_degrees.split(",") if v.strip()]
    except ValueError:
        fail(f"bad --kernel-degrees: {kernel_degrees!r}")
    if any(n < 1 for n in degrees):
        fail("kernel degrees must be ≥ 1")
    echo_config("filter-report", {"max_order": max_order, "step": step, "tol": tol, "kernel_degrees": degrees})
    try:
        report = boundary_smoothness_report(DEFAULT_FILTER, max_order=max_order, step=step)
    except ContractViolation as exc:
        fail(str(exc))
    table = Table(title=f"filter kappa={DEFAULT_FILTER.kappa}, step={step:g}")
    for col in ("order", "t", "left", "right", "gap"):
        table.add_column(col, justify="right")
    for g in report:
        table.add_row(str(g.order), f"{g.point:g}", f"{g.left:.6g}", f"{g.right:.6g}", f"{g.gap:.3e}")
    console.print(table)
    console.print(f"smoothness class: C^{smoothness_class(report, tol)}", highlight=False)
    if degrees:
        norms = kernel_l1_norms(degrees)
        table = Table(title="L1 norm of K_n")
        table.add_column("n", justify="right")
        table.add_column("int |K_n(0, y)| dy", justify="right")
        for n, value in norms.items():
            table.add_row(str(n), f"{value:.4f}")
        console.print(table)


if __name__ == "__main__":
    main()
