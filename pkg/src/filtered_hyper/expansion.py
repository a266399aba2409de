from __future__ import annotations

import numpy as np

from .config import FLAGS
from .errors import PrecisionError
from .manifold import TORUS, Torus, as_points

_BLOCK_ENTRIES = 4_000_000


def block_size(n_modes: int) -> int:
    return max(1, min(FLAGS.eval_chunk, _BLOCK_ENTRIES // max(n_modes, 1)))


class SpectralExpansion:
    """A trigonometric polynomial sum_k c_k phi_k(x) over a fixed mode table.

    Point evaluation reduces over modes with numpy's pairwise summation in the
    table order, so repeated evaluations are bitwise identical.
    """

    def __init__(self, degree: int, modes: np.ndarray, coefficients: np.ndarray, manifold: Torus = TORUS) -> None:
        modes = np.array(modes, dtype=np.int64, copy=True)
        coefficients = np.array(coefficients, dtype=complex, copy=True)
        if modes.shape != (coefficients.shape[0], 2):
            raise ValueError("mode table and coefficient table disagree in length")
        modes.flags.writeable = False
        coefficients.flags.writeable = False
        self.degree = int(degree)
        self.modes = modes
        self.coefficients = coefficients
        self.manifold = manifold

    def evaluate_complex(self, points) -> np.ndarray:
        pts = as_points(points)
        out = np.empty(pts.shape[0], dtype=complex)
        step = block_size(len(self.modes))
        for start in range(0, pts.shape[0], step):
            phi = self.manifold.basis(self.modes, pts[start : start + step])
            out[start : start + step] = (phi * self.coefficients).sum(axis=1)
        return out

    def evaluate(self, points) -> np.ndarray:
        """Real part of the expansion at ``points``."""
        return self.evaluate_complex(points).real

    def __call__(self, points) -> np.ndarray:
        return self.evaluate(points)

    def imaginary_residual(self, points) -> float:
        values = self.evaluate_complex(points)
        return float(np.max(np.abs(values.imag))) if values.size else 0.0

    def grid_values(self, resolution: int) -> np.ndarray:
        """Complex values on ``reference_grid(resolution)`` as a (G, G) array, via inverse FFT."""
        kmax = int(np.max(np.abs(self.modes))) if len(self.modes) else 0
        if resolution < 2 * kmax + 1:
            raise PrecisionError(f"grid resolution {resolution} aliases modes up to {kmax}")
        spectrum = np.zeros((resolution, resolution), dtype=complex)
        spectrum[self.modes[:, 0] % resolution, self.modes[:, 1] % resolution] = self.coefficients
        return self.manifold.scale * resolution * resolution * np.fft.ifft2(spectrum)

    def evaluate_on_grid(self, resolution: int) -> np.ndarray:
        return self.grid_values(resolution).real.ravel()
