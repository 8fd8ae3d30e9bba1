"""The quartic-sinc smoothing kernel and the constant c_d of the concentration bound.

f_0(y) = 3/(8 pi) [sin(y/4)/(y/4)]^4 is a probability density whose Fourier
transform vanishes outside [-1, 1].  With f the product kernel on R^d,
c_d = (2 pi)^-d sup_{|x|_inf <= 1/2} 1/f(x).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

__all__ = ["kernel_density", "kernel_ft", "c_d", "KernelCheck", "kernel_cross_check"]


def kernel_density(y) -> np.ndarray:
    """f_0(y), with the removable singularity at 0 filled in."""
    y = np.asarray(y, float)
    return 3.0 / (8.0 * math.pi) * np.sinc(y / (4.0 * math.pi)) ** 4


def kernel_ft(t) -> np.ndarray:
    """int e^{i t y} f_0(y) dy: 1 - 6t^2 + 6|t|^3 on |t| <= 1/2, 2(1 - |t|)^3 on [1/2, 1], 0 beyond."""
    u = np.abs(np.asarray(t, float))
    inner = 1.0 - 6.0 * u**2 + 6.0 * u**3
    outer = 2.0 * (1.0 - u) ** 3
    return np.where(u <= 0.5, inner, np.where(u < 1.0, outer, 0.0))


@lru_cache(maxsize=None)
def _c1() -> float:
    """(2 pi)^-1 sup_{|y| <= 1/2} 1/f_0(y): grid search, then bounded refinement to 1e-12."""
    y = np.linspace(-0.5, 0.5, 4001)
    inv = 1.0 / kernel_density(y)
    i = int(np.argmax(inv))
    lo, hi = y[max(i - 1, 0)], y[min(i + 1, len(y) - 1)]
    res = optimize.minimize_scalar(lambda v: -1.0 / float(kernel_density(v)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    best = max(float(inv[i]), -float(res.fun))
    return best / (2.0 * math.pi)


def c_d(d: int) -> float:
    """c_d for the product kernel; the sup of a product of positive factors is the product of sups."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return _c1() ** d


@dataclass(frozen=True)
class KernelCheck:
    normalization: float  # int f_0, should be 1
    max_ft_error: float  # numeric transform vs the closed form on a t grid
    c1: float

    def to_json(self):
        return {"normalization": self.normalization, "max_ft_error": self.max_ft_error, "c1": self.c1}


def kernel_cross_check(t_grid=None) -> KernelCheck:
    """Check the kernel by a second quadrature: its mass and its Fourier transform."""
    # f_0 decays like y^-4, so the mass beyond L = 4000 is below 1e-10
    L = 4.0e3
    mass = 2.0 * integrate.quad(kernel_density, 0.0, L, limit=4000)[0]
    t = np.linspace(0.0, 1.2, 13) if t_grid is None else np.asarray(t_grid, float)
    errs = []
    for ti in t:
        val = 2.0 * integrate.quad(kernel_density, 0.0, L, weight="cos", wvar=float(ti), limit=4000)[0]
        errs.append(abs(val - float(kernel_ft(ti))))
    return KernelCheck(mass, float(max(errs)), _c1())
