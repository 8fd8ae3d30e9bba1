"""Strictly stable laws: characteristic functions, densities and radial integrals."""
from .density import DensityGrid, density
from .isotropic import isotropic_radial_density, radial_hankel, radial_series
from .radial import RadialIntegral, UniformConvergenceReport, radial_uniform_convergence_check, rho, rho_tail
from .law import SpectralMeasure, StableLaw, cf, fibonacci_sphere, isotropic_moment
from .onedim import sym_stable_cdf, sym_stable_pdf, sym_stable_sf

__all__ = [
    "RadialIntegral",
    "UniformConvergenceReport",
    "radial_uniform_convergence_check",
    "rho",
    "rho_tail",
    "DensityGrid",
    "SpectralMeasure",
    "StableLaw",
    "cf",
    "density",
    "fibonacci_sphere",
    "isotropic_moment",
    "isotropic_radial_density",
    "radial_hankel",
    "radial_series",
    "sym_stable_cdf",
    "sym_stable_pdf",
    "sym_stable_sf",
]
