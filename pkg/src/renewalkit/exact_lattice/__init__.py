"""Exact integer and rational algebra for lattice structure of step laws."""
from .decompose import (
    AperiodicityResult,
    LatticeDecomposition,
    LatticeLaw,
    decompose,
    difference_lattice_snf,
    in_difference_coset,
    is_aperiodic,
)
from .intmat import UnimodularMatrix, bezout_min, determinant, extended_gcd, smith_normal_form
from .normalize import normalize_vector, rational_pair_matrix
from .symbolic import SymbolicReal, as_symbolic, parse_symbolic

__all__ = [
    "AperiodicityResult",
    "LatticeDecomposition",
    "LatticeLaw",
    "SymbolicReal",
    "UnimodularMatrix",
    "as_symbolic",
    "bezout_min",
    "decompose",
    "determinant",
    "difference_lattice_snf",
    "extended_gcd",
    "in_difference_coset",
    "is_aperiodic",
    "normalize_vector",
    "parse_symbolic",
    "rational_pair_matrix",
    "smith_normal_form",
]
