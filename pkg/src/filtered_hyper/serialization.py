"""Text formats for quadrature rules, datasets and fitted estimators.

Numbers are written as 17 significant digits (default) or as hexadecimal
floats; both read back to the identical double.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from .data import Dataset, NoiseModel, parse_target
from .errors import ContractViolation, FormatError
from .estimator import DfhEstimator, Estimator, NdfhEstimator
from .kernel import build_kernel
from .quadrature import QuadratureRule

FORMATS = ("decimal", "hex")

RULE_HEADER = re.compile(r"^# torus-quadrature v1, N=(\d+), degree=(-?\d+), provenance=(.+)$")
RULE_META = re.compile(r"^# measure=(\w+), degenerate=([01]), gate_m=(\d*)$")
DATASET_HEADER = re.compile(r"^# torus-dataset v1, N=(\d+), noise=(.+), seed=(-?\d+)$")
DATASET_META = re.compile(r"^# target=(.+)$")
ESTIMATOR_HEADER = re.compile(r"^# torus-estimator v1, n=(\d+), m=(\d+)$")
SHARD_HEADER = re.compile(r"^# shard=(\d+), size=(\d+), degenerate=([01])$")


def format_float(value: float, fmt: str = "decimal") -> str:
    if fmt == "hex":
        return float(value).hex()
    if fmt == "decimal":
        return format(float(value), ".17g")
    raise ContractViolation(f"unknown number format {fmt!r}; expected one of {FORMATS}")


def parse_float(text: str) -> float:
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        return float.fromhex(text)


def _read_lines(path: Union[str, Path]) -> List[str]:
    try:
        return Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def _rows(lines: List[str], width: int, where: str) -> np.ndarray:
    rows = []
    for lineno, line in lines:
        parts = line.split(",")
        if len(parts) != width:
            raise FormatError(f"{where}:{lineno}: expected {width} fields, got {len(parts)}")
        try:
            rows.append([parse_float(p) for p in parts])
        except ValueError as exc:
            raise FormatError(f"{where}:{lineno}: {exc}") from exc
    return np.array(rows, dtype=float).reshape(len(rows), width)


def _split(lines: List[str]) -> Tuple[List[str], List[Tuple[int, str]]]:
    comments, data = [], []
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        (comments if line.startswith("#") else data).append(line if line.startswith("#") else (i, line))
    return comments, data


def write_rule(Q: QuadratureRule, path: Union[str, Path], fmt: str = "decimal") -> Path:
    path = Path(path)
    lines = [
        f"# torus-quadrature v1, N={Q.size}, degree={Q.degree}, provenance={Q.provenance}",
        f"# measure={Q.measure}, degenerate={int(Q.degenerate)}, gate_m={Q.gate_m or ''}",
    ]
    lines += [
        f"{format_float(x[0], fmt)},{format_float(x[1], fmt)},{format_float(w, fmt)}"
        for x, w in zip(Q.nodes, Q.weights)
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_rule(path: Union[str, Path]) -> QuadratureRule:
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file")
    header = RULE_HEADER.match(lines[0])
    if not header:
        raise FormatError(f"{path}:1: not a torus-quadrature v1 header")
    comments, data = _split(lines[1:])
    measure, degenerate, gate_m = "lebesgue_2pi", False, None
    for line in comments:
        meta = RULE_META.match(line)
        if meta:
            measure, degenerate = meta.group(1), meta.group(2) == "1"
            gate_m = int(meta.group(3)) if meta.group(3) else None
    rows = _rows([(i + 1, l) for i, l in data], 3, str(path))
    if rows.shape[0] != int(header.group(1)):
        raise FormatError(f"{path}: header says N={header.group(1)}, found {rows.shape[0]} rows")
    return QuadratureRule(
        nodes=rows[:, :2],
        weights=rows[:, 2],
        degree=int(header.group(2)),
        provenance=header.group(3),
        measure=measure,
        degenerate=degenerate,
        gate_m=gate_m,
    )


def write_dataset(D: Dataset, path: Union[str, Path], fmt: str = "decimal") -> Path:
    path = Path(path)
    seed = D.noise.seed if D.noise.seed is not None else -1
    lines = [f"# torus-dataset v1, N={D.size}, noise={D.noise.describe()}, seed={seed}"]
    if D.target is not None and D.target.kind != "custom":
        lines.append(f"# target={D.target.describe()}")
    lines += [
        f"{format_float(x[0], fmt)},{format_float(x[1], fmt)},{format_float(y, fmt)}"
        for x, y in zip(D.points, D.values)
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_dataset(path: Union[str, Path]) -> Dataset:
    lines = _read_lines(path)
    header = DATASET_HEADER.match(lines[0]) if lines else None
    if not header:
        raise FormatError(f"{path}:1: not a torus-dataset v1 header")
    seed = int(header.group(3))
    noise = NoiseModel.parse(header.group(2), seed=None if seed < 0 else seed)
    comments, data = _split(lines[1:])
    target = None
    for line in comments:
        meta = DATASET_META.match(line)
        if meta:
            target = parse_target(meta.group(1))
    rows = _rows([(i + 1, l) for i, l in data], 3, str(path))
    if rows.shape[0] != int(header.group(1)):
        raise FormatError(f"{path}: header says N={header.group(1)}, found {rows.shape[0]} rows")
    return Dataset(points=rows[:, :2], values=rows[:, 2], noise=noise, target=target)


def _coefficient_rows(E: NdfhEstimator) -> List[str]:
    return [
        f"{int(k[0])},{int(k[1])},{format_float(c.real)},{format_float(c.imag)}"
        for k, c in zip(E.modes, E.coefficients)
    ]


def write_estimator(E: Estimator, path: Union[str, Path]) -> Path:
    path = Path(path)
    if isinstance(E, DfhEstimator):
        lines = [f"# torus-estimator v1, n={E.degree}, m={E.m}"]
        for j, (shard, size) in enumerate(zip(E.shards, E.sizes)):
            lines.append(f"# shard={j}, size={size}, degenerate={int(shard.degenerate)}")
            lines += _coefficient_rows(shard)
    else:
        lines = [f"# torus-estimator v1, n={E.degree}, m=1"]
        lines += _coefficient_rows(E)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _shard_from_rows(n: int, rows: np.ndarray, where: str, degenerate: bool = False) -> NdfhEstimator:
    K = build_kernel(n)
    if rows.shape[0] != len(K.modes) or not np.array_equal(rows[:, :2].astype(np.int64), K.modes):
        raise FormatError(f"{where}: coefficient table does not match the degree-{n} mode set")
    return NdfhEstimator(K, rows[:, 2] + 1j * rows[:, 3], degenerate=degenerate)


def read_estimator(path: Union[str, Path]) -> Estimator:
    lines = _read_lines(path)
    header = ESTIMATOR_HEADER.match(lines[0]) if lines else None
    if not header:
        raise FormatError(f"{path}:1: not a torus-estimator v1 header")
    n, m = int(header.group(1)), int(header.group(2))
    blocks: List[Tuple[Optional[re.Match], List[Tuple[int, str]]]] = [(None, [])]
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if line.startswith("#"):
            shard = SHARD_HEADER.match(line)
            if shard:
                blocks.append((shard, []))
            continue
        blocks[-1][1].append((i, line))
    if len(blocks) == 1:
        return _shard_from_rows(n, _rows(blocks[0][1], 4, str(path)), str(path))
    if blocks[0][1] or len(blocks) - 1 != m:
        raise FormatError(f"{path}: expected {m} shard blocks")
    shards, sizes = [], []
    for meta, rows in blocks[1:]:
        shards.append(_shard_from_rows(n, _rows(rows, 4, str(path)), str(path), meta.group(3) == "1"))
        sizes.append(int(meta.group(2)))
    return DfhEstimator(shards, sizes)
