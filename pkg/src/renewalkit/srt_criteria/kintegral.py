"""K(t, a, eta, h) = int_{|z| < eta|t|} F(t - z + h I_d) exp(-|z|/a) dz and its bounds.

Methods
-------
``product``     h^(d-1) int_{|z_1| < eta d |t_1|} P(xi in t_1 - z_1 + [0,h)) exp(-|z_1|/a) dz_1,
                with t_1 the largest coordinate of t.  An upper bound of K for
                product laws; exact piecewise integration for integer coordinates,
                Gauss-Legendre panels for continuous ones.
``quadrature``  polar quadrature of the d-dimensional integral using the
                model's cell probabilities (exact pmf sums on lattices).
``tail_bound``  h^d q_X(|t|/3), valid for eta <= 1/3; independent of a.

All methods accept an array of ``a`` and evaluate F once per t, so K on an
a-grid costs one evaluation of the cell probabilities.  Contributions from
|z| > 60 max(a) are dropped (relative size below e^-60).
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import NotApplicable, QuadratureBudgetExceeded
from ..stable_law import fibonacci_sphere

__all__ = ["K_integral", "K_METHODS", "default_method"]

K_METHODS = ("auto", "product", "quadrature", "tail_bound")
_CUTOFF = 60.0
_MAX_PIECES = 50_000_000
_MAX_NODES = 20_000_000
_GL = np.polynomial.legendre.leggauss(16)


def default_method(model) -> str:
    return "product" if hasattr(model, "coordinate_interval") else "quadrature"


def _exp_mass(u1, u2, a):
    """int_{u1}^{u2} exp(-|z|/a) dz for u1 <= u2 (broadcast)."""

    def prim(u):
        return np.sign(u) * a * -np.expm1(-np.abs(u) / a)

    return np.maximum(prim(u2) - prim(u1), 0.0)


def _breakpoints(L: float, first: float) -> np.ndarray:
    """0, first, 2 first, 4 first, ... , L."""
    b = [0.0]
    x = first
    while x < L:
        b.append(x)
        x *= 2.0
    b.append(L)
    return np.array(b)


def _radial_nodes(L: float, first: float, order: int = 16):
    x, w = _GL if order == 16 else np.polynomial.legendre.leggauss(order)
    b = _breakpoints(L, first)
    lo, hi = b[:-1, None], b[1:, None]
    nodes = 0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w[None, :]
    return nodes.ravel(), weights.ravel()


def _product_lattice(model, t1: float, L: float, a: np.ndarray, h: float) -> np.ndarray:
    # z_1 in (t1 - k - h, t1 - k]  <=>  k in t1 - z_1 + [0, h)
    k_lo = int(math.ceil(t1 - L - h))
    k_hi = int(math.floor(t1 + L))
    if k_hi - k_lo + 1 > _MAX_PIECES:
        raise QuadratureBudgetExceeded(f"{k_hi - k_lo + 1} lattice pieces")
    out = np.zeros(a.shape)
    step = max(1, 4_000_000 // max(len(a), 1))
    for start in range(k_lo, k_hi + 1, step):
        k = np.arange(start, min(start + step, k_hi + 1))
        p = model.coordinate_pmf(k)
        keep = p > 0
        k, p = k[keep], p[keep]
        u1 = np.maximum(t1 - k - h, -L)
        u2 = np.minimum(t1 - k, L)
        ok = u2 > u1
        out += p[ok] @ _exp_mass(u1[ok, None], u2[ok, None], a[None, :])
    return out


def _product_continuous(model, t1: float, L: float, a: np.ndarray, h: float) -> np.ndarray:
    r, w = _radial_nodes(L, min(h, float(a.min())) / 8.0)
    z = np.concatenate([-r[::-1], r])
    wz = np.concatenate([w[::-1], w])
    p = model.coordinate_interval(t1 - z, t1 - z + h)
    return (wz * p) @ np.exp(-np.abs(z)[:, None] / a[None, :])


def _directions(d: int, n: int):
    """Unit vectors and equal quadrature weights summing to the sphere area."""
    u = fibonacci_sphere(n, d)
    area = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    return u, np.full(len(u), area / len(u))


def _polar(model, t: np.ndarray, R: float, a: np.ndarray, h: float, n_dir: int) -> np.ndarray:
    d = model.d
    r, wr = _radial_nodes(R, min(h, float(a.min())) / 8.0, order=12)
    u, wu = _directions(d, n_dir)
    if len(r) * len(u) > _MAX_NODES:
        raise QuadratureBudgetExceeded(f"{len(r) * len(u)} quadrature nodes")
    z = r[:, None, None] * u[None, :, :]
    lo = (t[None, None, :] - z).reshape(-1, d)
    F = np.asarray(model.cell_probability(lo, h), float).reshape(len(r), len(u))
    radial = (F @ wu) * wr * r ** (d - 1)
    return radial @ np.exp(-r[:, None] / a[None, :])


def K_integral(model, t, a, eta: float, h: float = 1.0, method: str = "auto", n_directions: int = 64):
    """K(t, a, eta, h) for one t and scalar or array ``a``; see the module docstring for methods."""
    t = np.asarray(t, float).reshape(-1)
    if t.shape[0] != model.d:
        raise ValueError("t must have d coordinates")
    tn = float(np.linalg.norm(t))
    if tn == 0:
        raise ValueError("t must be nonzero")
    if not (eta > 0 and h > 0):
        raise ValueError("eta and h must be positive")
    scalar = np.ndim(a) == 0
    a = np.atleast_1d(np.asarray(a, float))
    if np.any(a <= 0):
        raise ValueError("a must be positive")
    if method == "auto":
        method = default_method(model)
    if method == "tail_bound":
        if eta > 1.0 / 3.0:
            raise NotApplicable("the tail bound needs eta <= 1/3")
        out = np.full(a.shape, h ** model.d * float(model.tail(tn / 3.0)))
    elif method == "product":
        if not hasattr(model, "coordinate_interval"):
            raise NotApplicable("product bound needs a product law")
        t1 = float(np.max(np.abs(t)))
        L = min(eta * model.d * t1, _CUTOFF * float(a.max()))
        if getattr(model, "coordinate_lattice", False):
            one = _product_lattice(model, t1, L, a, h)
        else:
            one = _product_continuous(model, t1, L, a, h)
        out = h ** (model.d - 1) * one
    elif method == "quadrature":
        R = min(eta * tn, _CUTOFF * float(a.max()))
        out = _polar(model, t, R, a, h, n_directions)
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {K_METHODS}")
    out = np.maximum(out, 0.0)
    return float(out[0]) if scalar else out
