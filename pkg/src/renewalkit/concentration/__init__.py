"""Concentration-function bounds and local large deviations of truncated walks."""
from .kernel import KernelCheck, c_d, kernel_cross_check, kernel_density, kernel_ft
from .lcf import (
    ConcentrationCheck,
    ConcentrationValue,
    cf_abs_integral,
    check_concentration,
    concentration_function,
    is_integer_lattice,
    lattice_concentration,
)
from .ldp import (
    LdpCheck,
    LdpShape,
    SumConcentration,
    check_local_ldp,
    ldp_shape_summary,
    sums_concentration,
    truncated_cell_probabilities,
    truncated_power,
)

__all__ = [
    "ConcentrationCheck",
    "ConcentrationValue",
    "KernelCheck",
    "LdpCheck",
    "LdpShape",
    "SumConcentration",
    "c_d",
    "cf_abs_integral",
    "check_concentration",
    "check_local_ldp",
    "concentration_function",
    "is_integer_lattice",
    "kernel_cross_check",
    "kernel_density",
    "kernel_ft",
    "lattice_concentration",
    "ldp_shape_summary",
    "sums_concentration",
    "truncated_cell_probabilities",
    "truncated_power",
]
