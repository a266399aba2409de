"""Targets, noise models and datasets (grid, random and interleaved shards)."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ContractViolation
from .manifold import TORUS, TWO_PI, TorusPoint, as_points, reduce_angles
from .quadrature import grid_rule
from .rng import derive_seed, make_generator

logger = logging.getLogger(__name__)

TARGET_KINDS = ("wendland_wu", "mode", "custom")
NOISE_KINDS = ("none", "bounded_uniform", "gaussian")


def wendland_wu_profile(u) -> np.ndarray:
    """(1 - u)_+^8 (32 u^3 + 25 u^2 + 8 u + 1)."""
    u = np.asarray(u, dtype=float)
    base = np.maximum(1.0 - u, 0.0)
    return base**8 * (((32.0 * u + 25.0) * u + 8.0) * u + 1.0)


def wendland_wu_eval(center, x) -> float | np.ndarray:
    c = as_points(center)
    u = np.atleast_1d(TORUS.geodesic_distance(as_points(x), c))
    values = wendland_wu_profile(u)
    return float(values[0]) if values.shape[0] == 1 else values


@dataclass(frozen=True)
class TargetFunction:
    kind: str
    center: Tuple[float, float] = (0.0, 0.0)
    mode: Tuple[int, int] = (0, 0)
    part: str = "real"
    handle: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    smoothness: float = math.inf

    def __post_init__(self) -> None:
        if self.kind not in TARGET_KINDS:
            raise ContractViolation(f"unknown target kind: {self.kind}")
        if self.part not in ("real", "imag"):
            raise ContractViolation("mode part must be 'real' or 'imag'")
        if self.kind == "custom" and self.handle is None:
            raise ContractViolation("custom target needs a handle")

    @classmethod
    def wendland_wu(cls, center=(0.0, 0.0)) -> "TargetFunction":
        p = TorusPoint(*center)
        return cls(kind="wendland_wu", center=(p.x1, p.x2), smoothness=6.0)

    @classmethod
    def of_mode(cls, k1: int, k2: int, part: str = "real") -> "TargetFunction":
        return cls(kind="mode", mode=(int(k1), int(k2)), part=part)

    @classmethod
    def custom(cls, handle: Callable[[np.ndarray], np.ndarray], smoothness: float = math.inf) -> "TargetFunction":
        return cls(kind="custom", handle=handle, smoothness=smoothness)

    def __call__(self, points) -> np.ndarray:
        pts = as_points(points)
        if self.kind == "wendland_wu":
            return np.atleast_1d(wendland_wu_eval(self.center, pts))
        if self.kind == "mode":
            phase = pts @ np.asarray(self.mode, dtype=float)
            trig = np.cos(phase) if self.part == "real" else np.sin(phase)
            return TORUS.scale * trig
        return np.asarray(self.handle(pts), dtype=float)

    def describe(self) -> str:
        if self.kind == "wendland_wu":
            return f"wendland:{self.center[0]!r},{self.center[1]!r}"
        if self.kind == "mode":
            return f"mode:{self.mode[0]},{self.mode[1]},{self.part}"
        return "custom"


def parse_target(text: str) -> TargetFunction:
    """``wendland``, ``wendland:x1,x2``, ``mode:k1,k2`` or ``mode:k1,k2,imag``."""
    name, _, args = text.strip().partition(":")
    parts = [a.strip() for a in args.split(",")] if args else []
    try:
        if name in ("wendland", "wendland_wu"):
            if parts and len(parts) != 2:
                raise ValueError
            return TargetFunction.wendland_wu(tuple(float(p) for p in parts) if parts else (0.0, 0.0))
        if name == "mode" and len(parts) in (2, 3):
            return TargetFunction.of_mode(int(parts[0]), int(parts[1]), parts[2] if len(parts) == 3 else "real")
    except ValueError:
        pass
    raise ContractViolation(f"bad target spec: {text!r}")


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "none"
    level: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in NOISE_KINDS:
            raise ContractViolation(f"unknown noise kind: {self.kind}")
        if self.level < 0 or not math.isfinite(self.level):
            raise ContractViolation("noise level must be finite and >= 0")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def bounded_uniform(cls, bound: float, seed: int) -> "NoiseModel":
        return cls(kind="bounded_uniform", level=bound, seed=seed)

    @classmethod
    def gaussian(cls, sigma: float, seed: int) -> "NoiseModel":
        return cls(kind="gaussian", level=sigma, seed=seed)

    @property
    def is_clean(self) -> bool:
        return self.kind == "none" or self.level == 0.0

    def with_seed(self, seed: int) -> "NoiseModel":
        return replace(self, seed=seed)

    def draw(self, size: int) -> np.ndarray:
        if self.is_clean:
            return np.zeros(size)
        if self.seed is None:
            raise ContractViolation("noisy data needs an explicit seed")
        rng = make_generator(self.seed)
        if self.kind == "bounded_uniform":
            return rng.uniform(-self.level, self.level, size)
        return rng.normal(0.0, self.level, size)

    def describe(self) -> str:
        return "none" if self.kind == "none" else f"{self.kind}({self.level!r})"

    @classmethod
    def parse(cls, text: str, seed: Optional[int] = None) -> "NoiseModel":
        text = text.strip()
        if text == "none":
            return cls()
        match = re.fullmatch(r"(bounded_uniform|gaussian)\(([^)]+)\)", text)
        if not match:
            raise ContractViolation(f"bad noise descriptor: {text!r}")
        return cls(kind=match.group(1), level=float(match.group(2)), seed=seed)


@dataclass(frozen=True)
class Sampling:
    kind: str
    n0: Optional[int] = None
    shift: Tuple[float, float] = (0.0, 0.0)
    seed: Optional[int] = None
    size: Optional[int] = None

    @classmethod
    def grid(cls, n0: int, shift: Sequence[float] = (0.0, 0.0)) -> "Sampling":
        if n0 < 1:
            raise ContractViolation("n0 must be >= 1")
        return cls(kind="grid", n0=int(n0), shift=(float(shift[0]), float(shift[1])))

    @classmethod
    def random(cls, seed: int, size: int) -> "Sampling":
        if size < 1:
            raise ContractViolation("sample size must be >= 1")
        return cls(kind="random", seed=int(seed), size=int(size))


@dataclass(frozen=True, eq=False)
class Dataset:
    points: np.ndarray
    values: np.ndarray
    noise: NoiseModel = field(default_factory=NoiseModel)
    target: Optional[TargetFunction] = None
    sampling: Optional[Sampling] = None

    def __post_init__(self) -> None:
        points = as_points(self.points).copy()
        values = np.array(self.values, dtype=float, copy=True).ravel()
        if points.shape[0] < 1 or points.shape[0] != values.shape[0]:
            raise ContractViolation(f"dataset needs N >= 1 matching points and values, got {points.shape[0]}/{values.shape[0]}")
        points.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    def with_values(self, values) -> "Dataset":
        return replace(self, values=values)


def make_dataset(target: TargetFunction, sampling: Sampling, noise: Optional[NoiseModel] = None) -> Dataset:
    noise = noise or NoiseModel.none()
    if sampling.kind == "grid":
        points = grid_rule(sampling.n0, sampling.shift).nodes
    elif sampling.kind == "random":
        rng = make_generator(sampling.seed)
        points = reduce_angles(rng.uniform(-np.pi, np.pi, size=(sampling.size, 2)))
    else:
        raise ContractViolation(f"unknown sampling kind: {sampling.kind}")
    values = target(points) + noise.draw(points.shape[0])
    return Dataset(points=points, values=values, noise=noise, target=target, sampling=sampling)


def default_shifts(n0: int, m: int) -> List[Tuple[float, float]]:
    """A delta-lattice of offsets when m is a square, else stripes along x1."""
    spacing = TWO_PI / (3 * n0)
    q = math.isqrt(m)
    if q * q == m:
        delta = spacing / q
        return [(a * delta, b * delta) for b in range(q) for a in range(q)]
    return [(j * spacing / m, 0.0) for j in range(m)]


def _check_shifts(n0: int, shifts: Sequence[Tuple[float, float]]) -> None:
    spacing = TWO_PI / (3 * n0)
    seen = set()
    for s in shifts:
        if len(s) != 2 or not all(0.0 <= v < TWO_PI for v in s):
            raise ContractViolation(f"shift {tuple(s)} must lie in [0, 2pi)^2")
        key = tuple(round((v % spacing) / spacing * 1e9) % 10**9 for v in s)
        if key in seen:
            raise ContractViolation(f"shift {tuple(s)} repeats another shard's lattice; shards must be disjoint")
        seen.add(key)


def shard_interleaved(
    target: TargetFunction,
    n0: int,
    m: int,
    shifts: Optional[Sequence[Tuple[float, float]]] = None,
    noise: Optional[NoiseModel] = None,
) -> List[Dataset]:
    """m translated copies of the 9 n0^2 grid; shard j draws noise from a seed derived for j."""
    if m < 1:
        raise ContractViolation("m must be >= 1")
    shifts = list(shifts) if shifts is not None else default_shifts(n0, m)
    if len(shifts) != m:
        raise ContractViolation(f"expected {m} shifts, got {len(shifts)}")
    _check_shifts(n0, shifts)
    noise = noise or NoiseModel.none()
    if not noise.is_clean and noise.seed is None:
        raise ContractViolation("noisy shards need an explicit seed")
    shards = []
    for j, s in enumerate(shifts):
        shard_noise = noise if noise.is_clean else noise.with_seed(derive_seed(noise.seed, j))
        shards.append(make_dataset(target, Sampling.grid(n0, s), shard_noise))
    return shards


def split_dataset(D: Dataset, m: int) -> List[Dataset]:
    """Contiguous near-equal blocks; suited to i.i.d. random samples."""
    if not 1 <= m <= D.size:
        raise ContractViolation(f"m must lie in 1..{D.size}")
    bounds = np.linspace(0, D.size, m + 1).round().astype(int)
    return [
        replace(D, points=D.points[a:b], values=D.values[a:b])
        for a, b in zip(bounds[:-1], bounds[1:])
    ]


def merge_datasets(shards: Sequence[Dataset]) -> Dataset:
    if not shards:
        raise ContractViolation("nothing to merge")
    first = shards[0]
    return Dataset(
        points=np.concatenate([d.points for d in shards]),
        values=np.concatenate([d.values for d in shards]),
        noise=first.noise,
        target=first.target,
    )
