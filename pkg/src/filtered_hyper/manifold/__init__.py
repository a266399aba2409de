from .base import ManifoldSpectrum, ReferenceGrid
from .torus import TORUS, TWO_PI, MultiIndex, Torus, TorusPoint, as_modes, as_points, reduce_angles

__all__ = [
    "ManifoldSpectrum",
    "ReferenceGrid",
    "Torus",
    "TorusPoint",
    "MultiIndex",
    "TORUS",
    "TWO_PI",
    "as_points",
    "as_modes",
    "reduce_angles",
]
