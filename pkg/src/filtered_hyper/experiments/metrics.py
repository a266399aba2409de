from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..data import Dataset, TargetFunction
from ..errors import ContractViolation, RefinementError
from ..filter import DEFAULT_FILTER, Filter
from ..kernel import build_kernel
from ..manifold import TORUS

logger = logging.getLogger(__name__)

REFINEMENT_TOLERANCE = 0.10
REFINEMENT_FLOOR = 1e-20


def _grid_values(E, resolution: int) -> np.ndarray:
    if hasattr(E, "evaluate_on_grid"):
        return E.evaluate_on_grid(resolution)
    return np.asarray(E(TORUS.reference_grid(resolution).points), dtype=float)


def _sq_error_on_grid(E, target: TargetFunction, resolution: int) -> float:
    grid = TORUS.reference_grid(resolution)
    diff = _grid_values(E, resolution) - target(grid.points)
    return float(np.sum(grid.weights * diff * diff))


def l2_sq_error(E, target: TargetFunction, resolution: Optional[int] = None, strict: bool = False) -> float:
    """Squared L2 distance to ``target`` on the reference grid, with a refinement check.

    The value is recomputed on a grid of twice the resolution; a relative
    change above 10% is logged, or raised as :class:`RefinementError` when
    ``strict``.
    """
    n = E.degree
    G = resolution or 8 * n
    if G < 4 * n:
        raise ContractViolation(f"resolution {G} must be at least 4n = {4 * n}")
    value = _sq_error_on_grid(E, target, G)
    other = 2 * G
    check = _sq_error_on_grid(E, target, other)
    scale = max(value, check)
    if scale > REFINEMENT_FLOOR:
        change = abs(value - check) / scale
        if change > REFINEMENT_TOLERANCE:
            message = f"L2 error moved by {change:.1%} between G={G} and G={other}"
            if strict:
                raise RefinementError(message)
            logger.warning(message)
        elif change > 0.01:
            logger.debug("L2 error moved by %.2f%% between G=%d and G=%d", 100 * change, G, other)
    return value


def train_mse(E, D: Dataset) -> float:
    residual = np.asarray(E(D.points), dtype=float) - D.values
    return float(np.mean(residual * residual))


@dataclass
class RateFit:
    slope: float
    intercept: float
    used: int
    excluded: List[str] = field(default_factory=list)

    def ok(self, max_slope: float) -> bool:
        return self.slope <= max_slope


def fit_rate(rows: Sequence, error_field: str = "gen_l2sq", x_field: str = "N") -> RateFit:
    """Least-squares slope of log(error) against log(N); trials sharing N are averaged first."""
    grouped: Dict[float, List[float]] = defaultdict(list)
    excluded: List[str] = []
    for row in rows:
        if getattr(row, "skipped", None):
            excluded.append(f"{x_field}={getattr(row, x_field)}: skipped ({row.skipped})")
            continue
        x, err = float(getattr(row, x_field)), float(getattr(row, error_field))
        if not (err > 0 and math.isfinite(err)) or x <= 0:
            excluded.append(f"{x_field}={x:g}: non-positive {error_field}={err:g}")
            continue
        grouped[x].append(err)
    if len(grouped) < 3:
        raise ContractViolation(f"need at least 3 distinct {x_field} values with positive errors, got {len(grouped)}")
    xs = np.array(sorted(grouped))
    ys = np.array([np.mean(grouped[x]) for x in xs])
    slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
    if excluded:
        logger.info("rate fit excluded %d rows", len(excluded))
    return RateFit(slope=float(slope), intercept=float(intercept), used=len(xs), excluded=excluded)


def pairwise_rates(xs: Sequence[float], errors: Sequence[float]) -> List[float]:
    """Rates between consecutive refinements, log(E_i/E_{i-1}) / log(x_i/x_{i-1})."""
    return [
        math.log(errors[i] / errors[i - 1]) / math.log(xs[i] / xs[i - 1])
        for i in range(1, len(xs))
    ]


def noise_floor_factor(n: int, n0: int, H: Filter = DEFAULT_FILTER) -> float:
    """Expected training MSE per unit noise variance for grid NDFH of degree n on the 9 n0^2 grid.

    On the grid the fitted operator is circulant; its eigenvalue at discrete
    frequency j is the sum of H(|k|/n) over the modes k = j mod 3 n0.
    """
    side = 3 * n0
    K = build_kernel(n, H)
    spectrum = np.zeros((side, side))
    np.add.at(spectrum, (K.modes[:, 0] % side, K.modes[:, 1] % side), K.weights)
    return float(np.mean((1.0 - spectrum) ** 2))


def plateau_degree(rows: Sequence, error_field: str = "gen_l2sq") -> Dict[float, Optional[int]]:
    """Per noise level, the smallest n whose mean error exceeds 0.9x the previous degree's."""
    by_noise: Dict[float, Dict[int, List[float]]] = defaultdict(lambda: defaultdict(list))
    for row in rows:
        if getattr(row, "skipped", None):
            continue
        by_noise[float(row.noise)][int(row.n)].append(float(getattr(row, error_field)))
    result: Dict[float, Optional[int]] = {}
    for noise, per_n in sorted(by_noise.items()):
        degrees = sorted(per_n)
        means = [float(np.mean(per_n[n])) for n in degrees]
        result[noise] = next((degrees[i] for i in range(1, len(degrees)) if means[i] > 0.9 * means[i - 1]), None)
    return result


def monotone_within(values: Sequence[float], slack: float = 0.05) -> Tuple[bool, List[int]]:
    """Whether each value is at most (1 + slack) times its predecessor; returns offending indices."""
    bad = [i for i in range(1, len(values)) if values[i] > (1.0 + slack) * values[i - 1]]
    return not bad, bad
