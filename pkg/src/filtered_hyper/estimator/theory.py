"""Closed-form guides from the convergence theory: rates, server counts, degree windows."""

from __future__ import annotations

import math
from typing import Optional, Sequence, Tuple

from ..errors import ContractViolation

REGIMES = ("clean_det", "clean_random", "noisy_det", "noisy_random")


def _check_regime(regime: str) -> None:
    if regime not in REGIMES:
        raise ContractViolation(f"unknown regime {regime!r}; expected one of {', '.join(REGIMES)}")


def _floor_power(N: int, exponent: float) -> int:
    value = N**exponent
    return max(1, int(math.floor(value * (1.0 + 1e-12))))


def server_count_bound(
    N: int,
    r: float,
    d: int = 2,
    regime: str = "noisy_det",
    tau: Optional[float] = None,
    n: Optional[int] = None,
) -> int:
    """Largest server count m for which the distributed rate matches the non-distributed one."""
    _check_regime(regime)
    if N < 1 or d < 1:
        raise ContractViolation("N and d must be >= 1")
    if r <= d / 2:
        raise ContractViolation(f"smoothness r={r} must exceed d/2={d / 2}")
    if regime == "clean_det":
        return N
    if regime == "clean_random":
        if n is None or n < 1 or tau is None or tau <= 0:
            raise ContractViolation("clean_random needs a degree n >= 1 and tau > 0")
        return max(1, int(math.floor(N / n ** (d + tau))))
    if math.isinf(r):
        return N
    if regime == "noisy_det":
        return _floor_power(N, r / (r + d / 2))
    if tau is None or not 0 < tau < 2 * r:
        raise ContractViolation("noisy_random needs 0 < tau < 2r")
    return _floor_power(N, (r - tau / 2) / (r + d / 2))


def expected_rate(regime: str, r: float, d: int = 2, squared: bool = False) -> float:
    """Exponent e with ||V - f*||_2 ~ N^e; identical for the distributed estimator within its server bound."""
    _check_regime(regime)
    if regime.startswith("clean"):
        exponent = -r / d
    else:
        exponent = -1.0 if math.isinf(r) else -r / (r + d / 2)
    return 2 * exponent if squared else exponent


def shard_size_condition(sizes: Sequence[int], r: float, d: int = 2, tau: float = 0.0) -> bool:
    """min_j |D_j| >= N^{(d + tau)/(2r + d)}."""
    if not sizes:
        raise ContractViolation("no shards")
    N = sum(sizes)
    return min(sizes) >= N ** ((d + tau) / (2 * r + d))


def suggest_degree_window(N: int, r: float, d: int = 2, c3: float = 1.0) -> Tuple[int, int]:
    """Integer degrees n with c3/6 N^{1/(2r+d)} <= n <= c3/2 N^{1/(2r+d)}; a suggestion only."""
    if N < 1 or c3 <= 0:
        raise ContractViolation("N must be >= 1 and c3 > 0")
    base = N ** (1.0 / (2 * r + d))
    low = max(1, math.ceil(c3 / 6 * base))
    high = max(low, math.floor(c3 / 2 * base))
    return low, high
