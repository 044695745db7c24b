"""Depth functions, intersection growth and lazy random walks on finitely generated groups."""

from .errors import CapacityError, ExpDepthError, NumericalError, UsageError
from .groups import F2, HEISENBERG, Z, LatticeGroup, ProductGroup, parse_element, parse_group

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ExpDepthError",
    "NumericalError",
    "UsageError",
    "F2",
    "HEISENBERG",
    "Z",
    "LatticeGroup",
    "ProductGroup",
    "parse_element",
    "parse_group",
    "__version__",
]
