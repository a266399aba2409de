"""Filtered kernel K_n and the continuous filtered approximation V_n."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import ContractViolation, PrecisionError
from .expansion import SpectralExpansion, block_size
from .filter import DEFAULT_FILTER, Filter
from .manifold import TORUS, MultiIndex, Torus, as_modes, as_points

TargetLike = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class FilteredKernel:
    degree: int
    filter: Filter = DEFAULT_FILTER
    manifold: Torus = TORUS
    modes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise ContractViolation("kernel degree must be >= 1")
        # supp H = [0, 2]: every mode with |k| < 2n carries a nonzero weight
        modes = self.manifold.mode_array(2 * self.degree, strict=True)
        weights = np.asarray(self.filter(self.manifold.eigenvalues(modes) / self.degree), dtype=float)
        weights.flags.writeable = False
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "weights", weights)

    @property
    def scale_sq(self) -> float:
        return self.manifold.scale**2

    def __call__(self, x, y):
        return kernel_eval(self, x, y)


@lru_cache(maxsize=32)
def build_kernel(n: int, H: Filter = DEFAULT_FILTER) -> FilteredKernel:
    return FilteredKernel(degree=n, filter=H)


def kernel_eval(K: FilteredKernel, x, y) -> float | np.ndarray:
    """K_n(x, y) = c^2 sum_k H(|k|/n) cos(k.(x - y)); x or y may be a single point."""
    z = as_points(x) - as_points(y)
    kf = K.modes.astype(float)
    out = np.empty(z.shape[0])
    step = block_size(len(K.modes))
    for start in range(0, z.shape[0], step):
        out[start : start + step] = (np.cos(z[start : start + step] @ kf.T) * K.weights).sum(axis=1)
    out *= K.scale_sq
    return float(out[0]) if out.shape[0] == 1 else out


def kernel_grid_values(K: FilteredKernel, x, resolution: int) -> np.ndarray:
    """K_n(y, x) for y on ``reference_grid(resolution)``, flattened row-major."""
    if resolution < 4 * K.degree - 1:
        raise PrecisionError(f"resolution {resolution} too small for kernel degree {K.degree}")
    x0 = as_points(x)[0]
    spectrum = np.zeros((resolution, resolution), dtype=complex)
    phase = np.exp(-1j * (K.modes.astype(float) @ x0))
    spectrum[K.modes[:, 0] % resolution, K.modes[:, 1] % resolution] = K.weights * phase
    values = K.scale_sq * resolution * resolution * np.fft.ifft2(spectrum)
    return values.real.ravel()


def kernel_integral(K: FilteredKernel, x, resolution: Optional[int] = None) -> float:
    G = resolution or 4 * K.degree
    grid = K.manifold.reference_grid(G)
    return float(np.sum(kernel_grid_values(K, x, G) * grid.weights))


def kernel_l1_norm(K: FilteredKernel, x, resolution: Optional[int] = None) -> float:
    G = resolution or 8 * K.degree
    grid = K.manifold.reference_grid(G)
    return float(np.sum(np.abs(kernel_grid_values(K, x, G)) * grid.weights))


def fourier_coefficient(f: TargetLike, k, resolution: int, manifold: Torus = TORUS) -> complex:
    """<f, phi_k> by the equal-weight rule on ``reference_grid(resolution)``."""
    mode = as_modes(k)
    norm = float(np.hypot(*mode[0]))
    if resolution <= 2 * norm:
        raise PrecisionError(f"resolution {resolution} must exceed 2|k| = {2 * norm:.3f}")
    grid = manifold.reference_grid(resolution)
    values = np.asarray(f(grid.points), dtype=complex)
    phi = manifold.basis(mode, grid.points)[:, 0]
    return complex(np.sum(values * np.conj(phi) * grid.weights))


def grid_fourier_coefficients(f: TargetLike, modes: np.ndarray, resolution: int, manifold: Torus = TORUS) -> np.ndarray:
    """<f, phi_k> for every mode in ``modes`` from a single FFT of f on the reference grid."""
    grid = manifold.reference_grid(resolution)
    values = np.asarray(f(grid.points), dtype=complex).reshape(resolution, resolution)
    spectrum = np.fft.fft2(values)
    weight = manifold.total_measure() / resolution**2
    return weight * manifold.scale * spectrum[modes[:, 0] % resolution, modes[:, 1] % resolution]


def filtered_approximation(
    f: TargetLike, n: int, resolution: Optional[int] = None, H: Filter = DEFAULT_FILTER
) -> SpectralExpansion:
    """V_n(f) = sum_{|k|<2n} H(|k|/n) <f, phi_k> phi_k with the inner products on a fine grid."""
    G = resolution or 8 * n
    if G < 4 * n:
        raise PrecisionError(f"resolution {G} must be at least 4n = {4 * n}")
    K = build_kernel(n, H)
    coefficients = K.weights * grid_fourier_coefficients(f, K.modes, G, K.manifold)
    return SpectralExpansion(degree=n, modes=K.modes, coefficients=coefficients, manifold=K.manifold)


def mode_function(k: MultiIndex | tuple[int, int], manifold: Torus = TORUS) -> TargetLike:
    """The complex eigenfunction phi_k as a vectorised callable."""
    mode = as_modes(k)

    def phi(points: np.ndarray) -> np.ndarray:
        return manifold.basis(mode, as_points(points))[:, 0]

    return phi
