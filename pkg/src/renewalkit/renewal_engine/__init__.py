"""Convolution powers, renewal sums and local limit checks."""
from .cell import TargetCell
from .convolution import ConvolutionTable, convolve_exact, step_table
from .llt import AgreementReport, LLTReport, ResidueReport, llt_check, mc_vs_exact, residue_class_check
from .renewal import (
    MonteCarloWindow,
    RenewalEstimate,
    big_n_prediction,
    default_torus,
    llt_tail_estimate,
    mc_window,
    n_window,
    renewal_sum,
    renewal_sums,
    small_n_sum,
    target_points,
)
from .spectral import WindowResult, torus_window, window_sum

__all__ = [
    "AgreementReport",
    "ConvolutionTable",
    "LLTReport",
    "MonteCarloWindow",
    "RenewalEstimate",
    "ResidueReport",
    "TargetCell",
    "WindowResult",
    "big_n_prediction",
    "convolve_exact",
    "default_torus",
    "llt_check",
    "llt_tail_estimate",
    "mc_vs_exact",
    "mc_window",
    "n_window",
    "renewal_sum",
    "renewal_sums",
    "residue_class_check",
    "small_n_sum",
    "step_table",
    "target_points",
    "torus_window",
    "window_sum",
]
