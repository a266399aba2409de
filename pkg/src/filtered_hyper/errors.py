from __future__ import annotations
from typing import Sequence, Tuple


class FilteredHyperError(Exception):
    """Base class for all library errors."""


class ContractViolation(FilteredHyperError, ValueError):
    """A documented precondition was not met by the caller."""


class PrecisionError(ContractViolation):
    """The requested grid is too coarse for the exactness the operation promises."""


class InfeasibleError(ContractViolation):
    """Fewer sample points than moment conditions."""


class FormatError(ContractViolation):
    """A serialized file could not be parsed."""


class ConfigError(ContractViolation):
    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}" if line else message)


class QuadratureConstructionError(FilteredHyperError, RuntimeError):
    def __init__(self, message: str, deficient_modes: Sequence[Tuple[int, int]] = ()) -> None:
        self.deficient_modes = [tuple(int(v) for v in k) for k in deficient_modes]
        super().__init__(f"{message}; deficient modes: {self.deficient_modes}")


class RefinementError(FilteredHyperError, RuntimeError):
    """Reference-grid refinement changed an error integral by more than the tolerance."""
