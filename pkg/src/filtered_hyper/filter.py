"""Compactly supported filter H on [0, inf).

H is 1 on [0, 1], 0 on [2, inf) and a polynomial in s = t - 1 in between:

    H(1 + s) = 1 + s^(kappa+1) * (c0 + c1 s + ... + cq s^q)

The default coefficient table is the C^5 filter used throughout the package.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from sympy import Integer, Poly, Rational, symbols
from sympy.calculus.finite_diff import finite_diff_weights

from .errors import ContractViolation

logger = logging.getLogger(__name__)

DEFAULT_COEFFICIENTS: Tuple[float, ...] = (-462.0, 1980.0, -3465.0, 3080.0, -1386.0, 252.0)
SUPPORT = 2.0


@dataclass(frozen=True)
class Filter:
    kappa: int = 5
    coefficients: Tuple[float, ...] = DEFAULT_COEFFICIENTS
    support: float = field(default=SUPPORT, init=False)

    def __post_init__(self) -> None:
        if self.kappa < 1:
            raise ContractViolation("filter smoothness order must be >= 1")
        if not self.coefficients:
            raise ContractViolation("filter needs at least one middle-segment coefficient")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        end = 1.0 + math.fsum(self.coefficients)
        if abs(end) > 1e-9:
            raise ContractViolation(f"middle segment must vanish at t=2 (got {end:.3e})")
        bridge = filter_eval(self, np.linspace(1.0, 2.0, 2001))
        if bridge.min() < -1e-12 or bridge.max() > 1.0 + 1e-12:
            raise ContractViolation("filter values must stay within [0, 1]")

    @property
    def leading_power(self) -> int:
        return self.kappa + 1

    @property
    def middle_degree(self) -> int:
        return self.leading_power + len(self.coefficients) - 1

    def __call__(self, t):
        return filter_eval(self, t)


def filter_eval(H: Filter, t) -> float | np.ndarray:
    raw = np.asarray(t, dtype=float)
    if np.any(np.isnan(raw)) or np.any(raw < 0):
        raise ContractViolation("filter argument must be >= 0")
    arr = np.atleast_1d(raw)
    out = np.zeros_like(arr)
    out[arr <= 1.0] = 1.0
    mid = (arr > 1.0) & (arr < SUPPORT)
    s = arr[mid] - 1.0
    acc = np.zeros_like(s)
    for c in reversed(H.coefficients):
        acc = acc * s + c
    out[mid] = 1.0 + s**H.leading_power * acc
    return float(out[0]) if raw.ndim == 0 else out


DEFAULT_FILTER = Filter()


@dataclass(frozen=True)
class SmoothnessGap:
    order: int
    point: float
    left: float
    right: float

    @property
    def gap(self) -> float:
        return abs(self.left - self.right)


def _pieces(H: Filter):
    t = symbols("t")
    s = t - 1
    middle = Integer(1) + s**H.leading_power * sum(
        Rational(repr(c)) * s**j for j, c in enumerate(H.coefficients)
    )
    one, zero = Poly(Integer(1), t), Poly(Integer(0), t)
    mid = Poly(middle.expand(), t)
    return {1: (one, mid), 2: (mid, zero)}


def boundary_smoothness_report(H: Filter, max_order: int = 6, step: float = 1e-3) -> List[SmoothnessGap]:
    """Derivative estimates of each polynomial piece at t=1 and t=2, side by side.

    Central difference stencils are applied to the left and right pieces in
    exact rational arithmetic, wide enough to be exact on the pieces, so the
    gap per order reflects the filter's actual one-sided derivatives.
    """
    if not 1 <= max_order <= 6:
        raise ContractViolation("max_order must lie in 1..6")
    h = Rational(repr(float(step)))
    if h <= 0:
        raise ContractViolation("step must be positive")
    half = max(math.ceil(H.middle_degree / 2), math.ceil(max_order / 2)) + 1
    report: List[SmoothnessGap] = []
    for t0, (left, right) in _pieces(H).items():
        x0 = Integer(t0)
        stencil = [x0 + j * h for j in range(-half, half + 1)]
        weights = finite_diff_weights(max_order, stencil, x0)
        lvals = [left.eval(x) for x in stencil]
        rvals = [right.eval(x) for x in stencil]
        for k in range(max_order + 1):
            w = weights[k][-1]
            lk = sum(wi * vi for wi, vi in zip(w, lvals))
            rk = sum(wi * vi for wi, vi in zip(w, rvals))
            report.append(SmoothnessGap(order=k, point=float(t0), left=float(lk), right=float(rk)))
    logger.debug("smoothness report for kappa=%d: %d entries", H.kappa, len(report))
    return report


def smoothness_class(report: Sequence[SmoothnessGap], tol: float = 1e-5) -> int:
    """Largest order up to which every reported gap stays below ``tol``."""
    orders = sorted({g.order for g in report})
    best = -1
    for k in orders:
        if all(g.gap < tol for g in report if g.order == k):
            best = k
        else:
            break
    return best
