"""Build step models from plain dict configuration (the CLI model block)."""
from __future__ import annotations

from typing import Any, Dict

from ..errors import SpecInvalid
from ..exact_lattice import LatticeLaw
from .base import StepDistribution
from .finite import FiniteLattice, PointMass
from .pareto_lattice import ParetoLattice
from .product_stable import ProductStable
from .radial import RadialModel
from .williamson import WilliamsonModified

__all__ = ["build_model", "MODEL_FAMILIES"]

MODEL_FAMILIES = ("williamson", "product_stable", "pareto_lattice", "finite_lattice", "radial", "point_mass")


def build_model(cfg: Dict[str, Any]) -> StepDistribution:
    """Instantiate a model; unknown families and bad parameters raise SpecInvalid."""
    fam = cfg.get("family")
    try:
        if fam == "williamson":
            return WilliamsonModified(int(cfg["d"]), cfg.get("b", "const"))
        if fam == "product_stable":
            return ProductStable(int(cfg["d"]), float(cfg["alpha"]), float(cfg.get("scale", 1.0)))
        if fam == "pareto_lattice":
            return ParetoLattice(int(cfg["d"]), float(cfg["alpha"]), float(cfg.get("normalization", 1.0)))
        if fam == "finite_lattice":
            walk = cfg.get("walk")
            if walk == "simple":
                return FiniteLattice.simple_walk(int(cfg.get("d", 1)))
            if walk == "hold":
                return FiniteLattice.hold_walk(int(cfg.get("d", 2)))
            if "law" in cfg:
                return FiniteLattice(LatticeLaw.from_json(cfg["law"]))
            raise SpecInvalid("finite_lattice needs walk in {simple, hold} or a law")
        if fam == "point_mass":
            return PointMass(int(cfg.get("d", 1)))
        if fam == "radial":
            return RadialModel(int(cfg["d"]), cfg.get("profile", "log_tail"))
    except SpecInvalid:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise SpecInvalid(f"model {fam!r}: {exc}") from exc
    raise SpecInvalid(f"unknown model family {fam!r}; expected one of {MODEL_FAMILIES}")
