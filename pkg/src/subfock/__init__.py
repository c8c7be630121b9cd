"""Subproduct systems, their Fock spaces and the quantization maps between levels."""
from .subproduct import (
    SubproductSystem,
    build_from_ideal,
    build_full,
    build_symmetric,
    named_system,
    validate,
)
from .weights import WeightSystem, build_weight, phi
from .fock import GradedOperator, ShiftPolynomial, parse_element, represent
from .quantize import (
    contravariant_symbol,
    covariant_symbol,
    iota,
    jmath,
    limit_state,
)

__version__ = "0.1.0"
