from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from ..config import FLAGS
from ..data import Dataset
from ..errors import ContractViolation
from ..filter import DEFAULT_FILTER, Filter
from ..kernel import build_kernel
from ..quadrature import QuadratureRule
from .ndfh import NdfhEstimator, fit_ndfh

logger = logging.getLogger(__name__)


class DfhEstimator:
    """Synthesis sum_j |D_j|/|D| V_{D_j,n} of per-shard estimators."""

    def __init__(self, shards: Sequence[NdfhEstimator], sizes: Sequence[int]) -> None:
        if not shards or len(shards) != len(sizes):
            raise ContractViolation("need one size per shard estimator")
        if any(s < 1 for s in sizes):
            raise ContractViolation("shard sizes must be >= 1")
        degrees = {e.degree for e in shards}
        if len(degrees) != 1:
            raise ContractViolation(f"shards disagree on degree: {sorted(degrees)}")
        self.shards = list(shards)
        self.sizes = [int(s) for s in sizes]
        self.degree = degrees.pop()

    @property
    def m(self) -> int:
        return len(self.shards)

    @property
    def total(self) -> int:
        return sum(self.sizes)

    @property
    def synthesis_weights(self) -> List[Fraction]:
        return [Fraction(s, self.total) for s in self.sizes]

    @property
    def degenerate_shards(self) -> List[int]:
        return [j for j, e in enumerate(self.shards) if e.degenerate]

    def _combine(self, per_shard: List[np.ndarray]) -> np.ndarray:
        if self.m == 1:
            return per_shard[0]
        acc = np.zeros_like(per_shard[0])
        for w, v in zip(self.synthesis_weights, per_shard):
            acc += float(w) * v
        # rounding may step past the hull of the shard values
        stack = np.stack(per_shard)
        if np.iscomplexobj(acc):
            return acc
        return np.clip(acc, stack.min(axis=0), stack.max(axis=0))

    def evaluate_complex(self, points) -> np.ndarray:
        return self._combine([e.evaluate_complex(points) for e in self.shards])

    def evaluate(self, points) -> np.ndarray:
        return self._combine([e.evaluate(points) for e in self.shards])

    def __call__(self, points) -> np.ndarray:
        return self.evaluate(points)

    def evaluate_on_grid(self, resolution: int) -> np.ndarray:
        return self._combine([e.evaluate_on_grid(resolution) for e in self.shards])

    def imaginary_residual(self, points) -> float:
        values = self.evaluate_complex(points)
        return float(np.max(np.abs(values.imag))) if values.size else 0.0


def _check_rule(j: int, rule: QuadratureRule, n: int, m: int) -> None:
    if rule.provenance.startswith("solved_random"):
        if rule.gate_m != m:
            raise ContractViolation(f"shard {j}: solved rule was gated with m={rule.gate_m}, not m={m}")
    elif rule.degree < 3 * n - 1:
        raise ContractViolation(f"shard {j}: rule exact to degree {rule.degree} < 3n-1 = {3 * n - 1}")


def fit_dfh(
    shards: Sequence[Dataset],
    n: int,
    rules: Sequence[QuadratureRule],
    m: Optional[int] = None,
    H: Filter = DEFAULT_FILTER,
    threads: Optional[int] = None,
) -> DfhEstimator:
    """Fit each shard independently, then synthesize in shard order."""
    m = len(shards) if m is None else m
    if m < 1:
        raise ContractViolation("m must be >= 1")
    if len(shards) != len(rules) or not shards:
        raise ContractViolation(f"{len(shards)} shards but {len(rules)} rules")
    for j, rule in enumerate(rules):
        _check_rule(j, rule, n, m)
    total = sum(d.size for d in shards)
    if m > math.sqrt(total):
        logger.warning("m=%d exceeds sqrt(N)=%.1f; shard estimates may be too coarse", m, math.sqrt(total))
    build_kernel(n, H)  # warm the cache before workers share it
    workers = max(1, min(threads or FLAGS.threads, len(shards)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        estimators = list(pool.map(lambda pair: fit_ndfh(pair[0], n, pair[1], H), zip(shards, rules)))
    for j, e in enumerate(estimators):
        if e.degenerate:
            logger.warning("shard %d has a degenerate rule; its estimator is zero", j)
    return DfhEstimator(estimators, [d.size for d in shards])
