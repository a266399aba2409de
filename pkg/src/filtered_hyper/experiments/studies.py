"""Fixed-protocol studies: kernel localization, weight certificates, noise averaging."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..data import NoiseModel, Sampling, TargetFunction, make_dataset
from ..errors import QuadratureConstructionError
from ..estimator import fit_ndfh
from ..expansion import SpectralExpansion
from ..kernel import build_kernel, kernel_eval, kernel_l1_norm
from ..manifold import TORUS, reduce_angles
from ..quadrature import grid_rule, solve_random_weights
from ..rng import derive_seed, make_generator

logger = logging.getLogger(__name__)


def localization_constant(n: int, pairs: int = 1000, seed: int = 0, power: int = 5) -> float:
    """max |K_n(x, y)| (1 + n rho(x, y))^power / n^2 over random pairs.

    The separation y - x has a uniform direction and a length uniform on [0, pi],
    so near and far pairs are both represented.
    """
    rng = make_generator(seed)
    x = rng.uniform(-np.pi, np.pi, size=(pairs, 2))
    theta = rng.uniform(0.0, 2 * np.pi, size=pairs)
    r = rng.uniform(0.0, np.pi, size=pairs)
    y = reduce_angles(x + np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1))
    K = build_kernel(n)
    values = np.atleast_1d(kernel_eval(K, x, y))
    rho = np.atleast_1d(TORUS.geodesic_distance(x, y))
    return float(np.max(np.abs(values) * (1.0 + n * rho) ** power / n**2))


def kernel_l1_norms(degrees: Sequence[int], x=(0.0, 0.0)) -> Dict[int, float]:
    """int |K_n(x, y)| dy for each n; stays bounded as n grows."""
    return {n: kernel_l1_norm(build_kernel(n), x) for n in degrees}


@dataclass
class CertificateStudy:
    trials: int
    passed: int
    residuals: List[float] = field(default_factory=list)
    sum_sq: List[float] = field(default_factory=list)
    negative_counts: List[int] = field(default_factory=list)

    @property
    def pass_rate(self) -> float:
        return self.passed / self.trials


def weight_certificate_study(
    trials: int = 50, size: int = 500, n: int = 3, m: int = 1, seed: int = 0, residual_tol: float = 1e-8
) -> CertificateStudy:
    """Solve weights for ``trials`` random samples and count those meeting residual and 2/N bounds."""
    study = CertificateStudy(trials=trials, passed=0)
    for t in range(trials):
        rng = make_generator(derive_seed(seed, t))
        points = reduce_angles(rng.uniform(-np.pi, np.pi, size=(size, 2)))
        try:
            rule = solve_random_weights(points, n, m, seed=derive_seed(seed, t))
        except QuadratureConstructionError as exc:
            logger.info("trial %d: %s", t, exc)
            study.residuals.append(float("inf"))
            study.sum_sq.append(float("inf"))
            study.negative_counts.append(0)
            continue
        residual = rule.diagnostics["moment_residual"]
        sum_sq = rule.diagnostics["sum_sq"]
        study.residuals.append(residual)
        study.sum_sq.append(sum_sq)
        study.negative_counts.append(rule.negative_weight_count())
        if not rule.degenerate and residual < residual_tol and sum_sq <= 2.0 / size:
            study.passed += 1
    return study


@dataclass
class NoiseAveraging:
    checkpoints: List[int]
    deviations: List[float]
    slope: float


def noise_averaging_study(
    n: int = 4,
    trials: int = 200,
    sigma: float = 0.1,
    seed: int = 0,
    checkpoints: Sequence[int] = (10, 20, 50, 100, 200),
    target: Optional[TargetFunction] = None,
) -> NoiseAveraging:
    """RMS gap between the running mean of noisy fits and the clean fit, at each checkpoint."""
    if max(checkpoints) > trials:
        raise ValueError("checkpoints must not exceed the number of trials")
    target = target or TargetFunction.wendland_wu()
    rule = grid_rule(n)
    clean = make_dataset(target, Sampling.grid(n))
    base = fit_ndfh(clean, n, rule)
    running = np.zeros_like(base.coefficients)
    wanted = set(checkpoints)
    deviations: List[float] = []
    G = 4 * n
    for t in range(1, trials + 1):
        noise = NoiseModel.gaussian(sigma, derive_seed(seed, t)).draw(clean.size)
        running += fit_ndfh(clean.with_values(clean.values + noise), n, rule).coefficients
        if t in wanted:
            gap = SpectralExpansion(n, base.modes, running / t - base.coefficients)
            deviations.append(float(np.sqrt(np.mean(gap.evaluate_on_grid(G) ** 2))))
    slope = float(np.polyfit(np.log(sorted(wanted)), np.log(deviations), 1)[0])
    return NoiseAveraging(checkpoints=sorted(wanted), deviations=deviations, slope=slope)
