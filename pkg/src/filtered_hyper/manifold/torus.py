from __future__ import annotations
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Union

import numpy as np

from ..errors import ContractViolation
from .base import MEASURES, ManifoldSpectrum, ReferenceGrid

TWO_PI = 2.0 * np.pi


def reduce_angles(x) -> np.ndarray:
    """Map angles into [-pi, pi); values already inside are returned unchanged."""
    x = np.asarray(x, dtype=float)
    r = np.mod(x + np.pi, TWO_PI)
    r = np.where(r >= TWO_PI, 0.0, r) - np.pi
    r = np.where(r >= np.pi, -np.pi, r)
    return np.where((x >= -np.pi) & (x < np.pi), x, r)


@dataclass(frozen=True)
class TorusPoint:
    x1: float
    x2: float

    def __post_init__(self) -> None:
        a = reduce_angles([self.x1, self.x2])
        object.__setattr__(self, "x1", float(a[0]))
        object.__setattr__(self, "x2", float(a[1]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2])


@dataclass(frozen=True, order=True)
class MultiIndex:
    k1: int
    k2: int

    def eigenvalue(self) -> float:
        return float(np.hypot(self.k1, self.k2))

    def as_tuple(self) -> tuple[int, int]:
        return (self.k1, self.k2)


PointsLike = Union[TorusPoint, Iterable[TorusPoint], np.ndarray, Iterable[Iterable[float]]]


def as_points(x: PointsLike) -> np.ndarray:
    """Coerce a point, a list of points or an array into a reduced (P, 2) array."""
    if isinstance(x, TorusPoint):
        return x.as_array()[None, :]
    if not isinstance(x, np.ndarray):
        x = list(x)
        if x and isinstance(x[0], TorusPoint):
            x = [p.as_array() for p in x]
    arr = np.asarray(x, dtype=float)
    if arr.size == 0:
        return np.empty((0, 2))
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ContractViolation(f"expected points of shape (P, 2), got {arr.shape}")
    return reduce_angles(arr)


def as_modes(k) -> np.ndarray:
    if isinstance(k, MultiIndex):
        return np.array([[k.k1, k.k2]], dtype=np.int64)
    arr = np.asarray(k, dtype=np.int64)
    return arr[None, :] if arr.ndim == 1 else arr


@lru_cache(maxsize=64)
def _lattice_disk(bound_sq: float, strict: bool) -> np.ndarray:
    r = int(np.floor(np.sqrt(bound_sq))) + 1
    axis = np.arange(-r, r + 1, dtype=np.int64)
    k1, k2 = np.meshgrid(axis, axis, indexing="ij")
    k1, k2 = k1.ravel(), k2.ravel()
    sq = k1 * k1 + k2 * k2
    keep = sq < bound_sq if strict else sq <= bound_sq
    k1, k2, sq = k1[keep], k2[keep], sq[keep]
    order = np.lexsort((k2, k1, sq))
    modes = np.stack([k1[order], k2[order]], axis=1)
    modes.flags.writeable = False
    return modes


class Torus(ManifoldSpectrum):
    """The flat 2-torus [-pi, pi)^2 with eigenfunctions c * exp(i k.x), eigenvalue |k|.

    Under ``lebesgue_2pi`` the total mass is (2 pi)^2 and c = 1/(2 pi); under
    ``normalized`` the mass is 1 and c = 1.
    """

    dimension = 2

    def __init__(self, measure: str = "lebesgue_2pi") -> None:
        if measure not in MEASURES:
            raise ContractViolation(f"unknown measure convention: {measure}")
        self.measure = measure
        self.scale = 1.0 / TWO_PI if measure == "lebesgue_2pi" else 1.0

    def total_measure(self) -> float:
        return TWO_PI**2 if self.measure == "lebesgue_2pi" else 1.0

    def basis(self, modes: np.ndarray, points: np.ndarray) -> np.ndarray:
        phase = np.asarray(points, dtype=float) @ np.asarray(modes, dtype=float).T
        return self.scale * np.exp(1j * phase)

    def eigenfunction_eval(self, k, x) -> complex | np.ndarray:
        values = self.basis(as_modes(k), as_points(x))[:, 0]
        return complex(values[0]) if values.shape[0] == 1 else values

    def eigenvalues(self, modes: np.ndarray) -> np.ndarray:
        modes = np.asarray(modes, dtype=float)
        return np.hypot(modes[:, 0], modes[:, 1])

    def mode_array(self, max_eigenvalue: float, strict: bool = False) -> np.ndarray:
        """Lattice points with |k| <= max (or < max when ``strict``), ordered by (|k|^2, k1, k2)."""
        if max_eigenvalue < 0:
            raise ContractViolation("max_eigenvalue must be >= 0")
        bound_sq = float(max_eigenvalue) ** 2
        if not strict:
            bound_sq = bound_sq * (1.0 + 1e-12) + 1e-12
        return _lattice_disk(bound_sq, strict)

    def enumerate_modes(self, max_eigenvalue: float) -> List[MultiIndex]:
        return [MultiIndex(int(a), int(b)) for a, b in self.mode_array(max_eigenvalue)]

    def geodesic_distance(self, x, y) -> np.ndarray | float:
        px, py = as_points(x), as_points(y)
        d = np.abs(px - py)
        d = np.minimum(d, TWO_PI - d)
        dist = np.sqrt(np.sum(d * d, axis=1))
        return float(dist[0]) if dist.shape[0] == 1 else dist

    def grid_axis(self, resolution: int) -> np.ndarray:
        return TWO_PI * np.arange(resolution) / resolution

    def reference_grid(self, resolution: int) -> ReferenceGrid:
        """G x G equispaced grid (row-major in (j1, j2)) with equal weights."""
        if resolution < 1:
            raise ContractViolation("grid resolution must be >= 1")
        axis = self.grid_axis(resolution)
        a1, a2 = np.meshgrid(axis, axis, indexing="ij")
        points = reduce_angles(np.stack([a1.ravel(), a2.ravel()], axis=1))
        weights = np.full(resolution * resolution, self.total_measure() / resolution**2)
        return ReferenceGrid(resolution=resolution, points=points, weights=weights)


TORUS = Torus()
