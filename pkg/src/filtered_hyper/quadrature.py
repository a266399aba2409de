"""Quadrature rules on the torus: the equispaced grid rule and solved weights for random samples."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import svd
from scipy.optimize import nnls

from .errors import ContractViolation, InfeasibleError, QuadratureConstructionError
from .manifold import TORUS, TWO_PI, as_points, reduce_angles

logger = logging.getLogger(__name__)

RULE_MEASURES = ("lebesgue_2pi", "probability")
RANK_TOLERANCE = 1e-12
DEFICIENCY_THRESHOLD = 1e-3


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    degree: int
    provenance: str
    measure: str = "lebesgue_2pi"
    degenerate: bool = False
    gate_m: Optional[int] = None
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        nodes = as_points(self.nodes).copy()
        weights = np.array(self.weights, dtype=float, copy=True).ravel()
        if nodes.shape[0] != weights.shape[0]:
            raise ContractViolation(f"{nodes.shape[0]} nodes but {weights.shape[0]} weights")
        if self.measure not in RULE_MEASURES:
            raise ContractViolation(f"unknown rule measure: {self.measure}")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    @property
    def total_mass(self) -> float:
        return TWO_PI**2 if self.measure == "lebesgue_2pi" else 1.0

    def lebesgue_weights(self) -> np.ndarray:
        """Weights for integration against dx on [-pi, pi)^2."""
        if self.measure == "lebesgue_2pi":
            return self.weights
        return self.weights * TWO_PI**2

    def negative_weight_count(self) -> int:
        return int(np.count_nonzero(self.weights < 0))


@dataclass
class ExactnessReport:
    ok: bool
    max_residual: float
    degree: int
    failing_modes: List[Tuple[int, int]] = field(default_factory=list)

    def __float__(self) -> float:
        return self.max_residual


def grid_rule(n0: int, shift: Sequence[float] = (0.0, 0.0)) -> QuadratureRule:
    """9 n0^2 equispaced nodes with equal weights (2 pi)^2 / N, exact for |k| <= 3 n0 - 1."""
    if n0 < 1:
        raise ContractViolation("n0 must be >= 1")
    side = 3 * n0
    axis = TWO_PI * np.arange(side) / side
    a1, a2 = np.meshgrid(axis + float(shift[0]), axis + float(shift[1]), indexing="ij")
    nodes = reduce_angles(np.stack([a1.ravel(), a2.ravel()], axis=1))
    weights = np.full(side * side, TWO_PI**2 / (side * side))
    if shift[0] == 0 and shift[1] == 0:
        provenance = f"grid(n0={n0})"
    else:
        provenance = f"grid(n0={n0},shift={float(shift[0])!r}:{float(shift[1])!r})"
    return QuadratureRule(nodes=nodes, weights=weights, degree=side - 1, provenance=provenance)


def verify_exactness(Q: QuadratureRule, degree: int, tol: float = 1e-10) -> ExactnessReport:
    """Compare sum_i w_i phi_k(x_i) with the integral of phi_k for every |k| <= degree."""
    if degree < 0:
        raise ContractViolation("degree must be >= 0")
    modes = TORUS.mode_array(degree)
    phi = TORUS.basis(modes, Q.nodes)
    sums = Q.weights @ phi
    exact = np.zeros(len(modes), dtype=complex)
    exact[0] = Q.total_mass * TORUS.scale
    residual = np.abs(sums - exact)
    failing = [tuple(int(v) for v in modes[i]) for i in np.flatnonzero(residual >= tol)]
    worst = float(residual.max())
    return ExactnessReport(ok=not failing, max_residual=worst, degree=degree, failing_modes=failing)


def _real_moment_system(points: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray, List[Tuple[int, int]]]:
    """Real rows cos(k.x), sin(k.x) over one representative of each +-k pair with |k| <= n."""
    modes = TORUS.mode_array(n)
    reps = [(int(a), int(b)) for a, b in modes if a > 0 or (a == 0 and b > 0)]
    rows = [np.ones(points.shape[0])]
    row_modes: List[Tuple[int, int]] = [(0, 0)]
    for k in reps:
        phase = points @ np.asarray(k, dtype=float)
        rows.append(np.cos(phase))
        row_modes.append(k)
        rows.append(np.sin(phase))
        row_modes.append(k)
    A = np.vstack(rows)
    b = np.zeros(A.shape[0])
    b[0] = 1.0
    return A, b, row_modes


def moment_residual(Q: QuadratureRule, degree: Optional[int] = None) -> float:
    return verify_exactness(Q, Q.degree if degree is None else degree, tol=np.inf).max_residual


def solve_random_weights(
    points,
    n: int,
    m: int = 1,
    *,
    nonnegative: bool = False,
    seed: Optional[int] = None,
) -> QuadratureRule:
    """Minimal-norm weights for the probability-measure moment system of degree ``n``, then the 2/m gate.

    The system is posed in real form, so the minimal-norm solution is real.
    Negative weights are kept and counted in ``diagnostics``.
    """
    if n < 0:
        raise ContractViolation("degree must be >= 0")
    if m < 1:
        raise ContractViolation("m must be >= 1")
    pts = as_points(points)
    if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
        raise ContractViolation("sample points must be pairwise distinct")
    A, b, row_modes = _real_moment_system(pts, n)
    if pts.shape[0] < A.shape[0]:
        raise InfeasibleError(f"{pts.shape[0]} points cannot satisfy {A.shape[0]} moment conditions at degree {n}")

    U, s, Vt = svd(A, full_matrices=False)
    rank = int(np.count_nonzero(s > RANK_TOLERANCE * s[0]))
    if rank < A.shape[0]:
        null = np.abs(U[:, rank:]).max(axis=1)
        deficient = sorted({row_modes[i] for i in np.flatnonzero(null > DEFICIENCY_THRESHOLD)})
        raise QuadratureConstructionError(f"moment matrix has rank {rank} < {A.shape[0]}", deficient)
    w = Vt.T @ ((U.T @ b) / s)

    diagnostics: Dict[str, float] = {"rank": float(rank), "condition": float(s[0] / s[-1])}
    if nonnegative:
        w, res = nnls(A, b)
        diagnostics["nnls_residual"] = float(res)

    sum_sq = float(np.sum(w * w))
    negatives = int(np.count_nonzero(w < 0))
    diagnostics.update(
        sum_sq=sum_sq,
        negative=float(negatives),
        certificate=float(sum_sq <= 2.0 / pts.shape[0]),
    )
    if negatives:
        logger.warning("solved rule has %d negative weights (degree %d, N=%d)", negatives, n, pts.shape[0])

    tag = f"seed={seed}," if seed is not None else ""
    rule = QuadratureRule(
        nodes=pts,
        weights=w,
        degree=n,
        provenance=f"solved_random({tag}n={n})",
        measure="probability",
        diagnostics=diagnostics,
    )
    rule = apply_weight_gate(rule, m)
    rule.diagnostics["moment_residual"] = moment_residual(rule) if not rule.degenerate else float("nan")
    return rule


def apply_weight_gate(Q: QuadratureRule, m: int) -> QuadratureRule:
    """Zero every weight when sum w^2 exceeds 2/m; otherwise keep the rule and record m."""
    if m < 1:
        raise ContractViolation("m must be >= 1")
    if Q.degenerate or float(np.sum(Q.weights * Q.weights)) <= 2.0 / m:
        return replace(Q, gate_m=m, diagnostics=dict(Q.diagnostics))
    logger.warning("weight gate tripped for %s: sum w^2 exceeds 2/%d", Q.provenance, m)
    return replace(
        Q,
        weights=np.zeros_like(Q.weights),
        degenerate=True,
        gate_m=m,
        diagnostics=dict(Q.diagnostics),
    )
