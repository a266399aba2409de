from __future__ import annotations

from typing import Union

import numpy as np

from .dfh import DfhEstimator, fit_dfh
from .ndfh import NdfhEstimator, fit_ndfh
from .theory import REGIMES, expected_rate, server_count_bound, shard_size_condition, suggest_degree_window

Estimator = Union[NdfhEstimator, DfhEstimator]


def evaluate(E: Estimator, points) -> np.ndarray:
    """Real-valued estimator output at ``points``."""
    return E.evaluate(points)


__all__ = [
    "DfhEstimator",
    "Estimator",
    "NdfhEstimator",
    "REGIMES",
    "evaluate",
    "expected_rate",
    "fit_dfh",
    "fit_ndfh",
    "server_count_bound",
    "shard_size_condition",
    "suggest_degree_window",
]
