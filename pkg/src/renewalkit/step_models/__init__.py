"""Step distributions, norming functions and truncated-moment diagnostics."""
from .base import (
    LatticeInfo,
    MomentDiagnostics,
    NormingCheck,
    SamplePath,
    StepDistribution,
    norming_from_tail,
    sample_path,
    substream,
    truncated_moment_diagnostics,
)
from .config import MODEL_FAMILIES, build_model
from .coordinate_sums import CoordinateSums
from .finite import FiniteLattice, PointMass
from .norming import NormingFunction
from .pareto_lattice import ParetoLattice, positive_stable_rvs
from .product_stable import ProductStable, symmetric_stable_rvs
from .radial import RadialModel
from .williamson import WilliamsonModified, b_spec

__all__ = [
    "CoordinateSums",
    "FiniteLattice",
    "LatticeInfo",
    "MODEL_FAMILIES",
    "MomentDiagnostics",
    "NormingCheck",
    "NormingFunction",
    "ParetoLattice",
    "PointMass",
    "ProductStable",
    "RadialModel",
    "SamplePath",
    "StepDistribution",
    "WilliamsonModified",
    "b_spec",
    "build_model",
    "norming_from_tail",
    "positive_stable_rvs",
    "sample_path",
    "substream",
    "symmetric_stable_rvs",
    "truncated_moment_diagnostics",
]
