from __future__ import annotations
from dataclasses import dataclass
from typing import List

import numpy as np

MEASURES = ("lebesgue_2pi", "normalized")


@dataclass(frozen=True)
class ReferenceGrid:
    """Equal-weight evaluation grid; ``points`` is (P, d), ``weights`` is (P,)."""

    resolution: int
    points: np.ndarray
    weights: np.ndarray

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.sum(np.asarray(values) * self.weights))


class ManifoldSpectrum:
    """Abstract manifold with a known Laplace-Beltrami eigenbasis.

    Concrete manifolds provide the eigenpairs in nondecreasing eigenvalue
    order, a geodesic distance and an exact reference grid for integration.
    """

    dimension: int
    measure: str

    def total_measure(self) -> float:
        raise NotImplementedError

    def basis(self, modes: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Eigenfunction values, shape (len(points), len(modes))."""
        raise NotImplementedError

    def eigenvalues(self, modes: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def enumerate_modes(self, max_eigenvalue: float) -> List:
        raise NotImplementedError

    def geodesic_distance(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def reference_grid(self, resolution: int) -> ReferenceGrid:
        raise NotImplementedError

    def gram_deviation(self, max_eigenvalue: float, resolution: int) -> float:
        """Largest |<phi_l, phi_l'> - delta| over the modes up to ``max_eigenvalue``."""
        modes = self.mode_array(max_eigenvalue)
        grid = self.reference_grid(resolution)
        phi = self.basis(modes, grid.points)
        gram = phi.conj().T @ (phi * grid.weights[:, None])
        return float(np.max(np.abs(gram - np.eye(len(modes)))))

    def mode_array(self, max_eigenvalue: float, strict: bool = False) -> np.ndarray:
        raise NotImplementedError
