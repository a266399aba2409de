from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from ..data import Dataset
from ..errors import ContractViolation
from ..expansion import SpectralExpansion, block_size
from ..filter import DEFAULT_FILTER, Filter
from ..kernel import FilteredKernel, build_kernel, kernel_eval
from ..manifold import as_points
from ..quadrature import QuadratureRule

logger = logging.getLogger(__name__)


class NdfhEstimator(SpectralExpansion):
    """Filtered hyperinterpolation V_{D,n} stored as its coefficient table.

    ``rule`` and ``values`` are kept when the estimator was fitted in process,
    which enables the kernel-sum evaluation path; estimators read back from
    disk carry coefficients only.
    """

    def __init__(
        self,
        kernel: FilteredKernel,
        coefficients: np.ndarray,
        rule: Optional[QuadratureRule] = None,
        values: Optional[np.ndarray] = None,
        degenerate: bool = False,
    ) -> None:
        super().__init__(kernel.degree, kernel.modes, coefficients, kernel.manifold)
        self.kernel = kernel
        self.rule = rule
        self.values = values
        self.degenerate = degenerate

    @property
    def size(self) -> int:
        return self.rule.size if self.rule is not None else 0

    def evaluate_kernel_sum(self, points) -> np.ndarray:
        """sum_i w_i y_i K_n(x, x_i), evaluated point by point."""
        if self.rule is None or self.values is None:
            raise ContractViolation("kernel-sum evaluation needs the fitted rule and values")
        wy = self.rule.lebesgue_weights() * self.values
        pts = as_points(points)
        return np.array([np.sum(wy * np.atleast_1d(kernel_eval(self.kernel, x, self.rule.nodes))) for x in pts])


def fit_ndfh(D: Dataset, n: int, Q: QuadratureRule, H: Filter = DEFAULT_FILTER) -> NdfhEstimator:
    """c_k = H(|k|/n) sum_i w_i y_i conj(phi_k(x_i)) over |k| < 2n."""
    if n < 1:
        raise ContractViolation("degree n must be >= 1")
    if Q.nodes.shape != D.points.shape or not np.array_equal(Q.nodes, D.points):
        raise ContractViolation("quadrature nodes do not match dataset points")
    K = build_kernel(n, H)
    wy = Q.lebesgue_weights() * D.values
    coefficients = np.zeros(len(K.modes), dtype=complex)
    if not Q.degenerate:
        step = block_size(len(K.modes))
        for start in range(0, D.size, step):
            phi = K.manifold.basis(K.modes, D.points[start : start + step])
            coefficients += (np.conj(phi) * wy[start : start + step, None]).sum(axis=0)
        coefficients *= K.weights
    logger.debug("fitted NDFH n=%d on N=%d points (%d modes)", n, D.size, len(K.modes))
    return NdfhEstimator(K, coefficients, rule=Q, values=D.values, degenerate=Q.degenerate)
