"""The concentration bound Q_X(h) <= c_d [(1/a) v h]^d int_{|t|_inf <= a} |phi_X(t)| dt.

Q_X(h) = sup_x P(X in x + [0, h)^d).  On Z^d it is the largest pmf sum over
ceil(h)^d integer blocks, computed exactly on a box; the mass outside the
box is added to the left side so a reported pass is never optimistic.  For
continuous laws the sup is searched: a seeded histogram proposes cells,
exact cell probabilities are refined around them, and the histogram's
upper confidence value widens the left side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from ..errors import NotApplicable, QuadratureBudgetExceeded
from ..renewal_engine.convolution import step_table
from ..step_models.base import substream
from .kernel import c_d

__all__ = [
    "ConcentrationCheck",
    "ConcentrationValue",
    "concentration_function",
    "lattice_concentration",
    "cf_abs_integral",
    "check_concentration",
    "is_integer_lattice",
]

_MAX_NODES = 4_000_000
_GL = np.polynomial.legendre.leggauss(8)
_RTOL = 1e-9


@dataclass(frozen=True)
class ConcentrationValue:
    """Q_X(h) within [value, value + error]; ``lost_mass`` is the mass outside the searched box."""

    h: float
    value: float
    error: float
    method: str
    lost_mass: float = 0.0

    @property
    def upper(self) -> float:
        return self.value + self.error


@dataclass(frozen=True)
class ConcentrationCheck:
    model: dict
    h: float
    a: float
    lhs: float
    lhs_error: float
    lhs_method: str
    rhs: float
    integral: float
    c_d: float
    margin: float  # rhs - (lhs + lhs_error)

    @property
    def holds(self) -> bool:
        return self.lhs + self.lhs_error <= self.rhs * (1.0 + _RTOL)

    @property
    def ratio(self) -> float:
        return (self.lhs + self.lhs_error) / self.rhs if self.rhs > 0 else math.inf

    def to_json(self):
        return {
            "model": self.model,
            "h": self.h,
            "a": self.a,
            "lhs": self.lhs,
            "lhs_error": self.lhs_error,
            "lhs_method": self.lhs_method,
            "rhs": self.rhs,
            "integral": self.integral,
            "c_d": self.c_d,
            "margin": self.margin,
            "ratio": self.ratio,
            "holds": self.holds,
        }


def is_integer_lattice(model) -> bool:
    return hasattr(model, "pmf_box") or hasattr(model, "coordinate_pmf")


def _default_radius(model) -> int:
    if hasattr(model, "points"):
        return int(np.abs(model.points).max())
    return {1: 8192, 2: 512, 3: 48}.get(model.d, 16)


def _block_max(table: np.ndarray, m: int) -> float:
    """Largest sum over m^d consecutive entries, blocks allowed to overhang the box."""
    t = np.pad(table, m - 1)
    for ax in range(t.ndim):
        c = np.cumsum(t, axis=ax)
        c = np.concatenate([np.zeros_like(np.take(c, [0], axis=ax)), c], axis=ax)
        n = t.shape[ax]
        t = np.take(c, np.arange(m, n + 1), axis=ax) - np.take(c, np.arange(0, n + 1 - m), axis=ax)
    return float(t.max())


def lattice_concentration(model, h_list: Sequence[float], radius: Optional[int] = None) -> list:
    """Exact Q_X(h) for laws on Z^d from one pmf box; the error is the mass outside the box."""
    R = _default_radius(model) if radius is None else int(radius)
    table = step_table(model, R)
    lost = max(0.0, 1.0 - float(table.sum()))
    out = []
    for h in h_list:
        # a cell x + [0, h)^d holds at most ceil(h) integers per axis, and some cell holds exactly that many
        m = max(1, int(math.ceil(float(h) - 1e-12)))
        out.append(ConcentrationValue(float(h), _block_max(table, m), lost, "exact_lattice", lost))
    return out


def _search_continuous(model, h: float, n_samples: int, seed: int, cell_grid) -> ConcentrationValue:
    d = model.d
    x = np.asarray(model.sample(n_samples, substream(seed, 0)), float)
    # histogram on shifted grids of side h; the best bins seed the exact search
    cands, hist_max = [], 0.0
    for k, shift in enumerate(np.linspace(0.0, h, 4, endpoint=False)):
        idx = np.floor((x - shift) / h).astype(np.int64)
        keys, counts = np.unique(idx, axis=0, return_counts=True)
        top = np.argsort(counts)[::-1][:4]
        hist_max = max(hist_max, float(counts[top[0]]) / n_samples)
        cands.extend((keys[top] * h + shift).tolist())
    if cell_grid is not None:
        cands.extend(np.asarray(cell_grid, float).reshape(-1, d).tolist())
    cands = np.asarray(cands, float)
    probs = np.asarray(model.cell_probability(cands, h), float)
    order = np.argsort(probs)[::-1][:3]
    best = float(probs[order[0]])
    for i in order:
        res = optimize.minimize(
            lambda v: -float(model.cell_probability(v[None, :], h)[0]),
            cands[i],
            method="Nelder-Mead",
            options={"xatol": 1e-4 * h, "fatol": 1e-12, "maxiter": 400},
        )
        best = max(best, -float(res.fun))
    # 4-sigma upper value of the best histogram bin
    p_up = hist_max + 4.0 * math.sqrt(max(hist_max * (1 - hist_max), 1.0 / n_samples) / n_samples)
    return ConcentrationValue(h, best, max(0.0, p_up - best), "cell_search")


def concentration_function(model, h_list, radius=None, n_samples: int = 200_000, seed: int = 0, cell_grid=None) -> list:
    """Q_X(h) for each h: exact on Z^d, searched (with a widened upper value) otherwise."""
    if is_integer_lattice(model):
        return lattice_concentration(model, h_list, radius)
    return [_search_continuous(model, float(h), n_samples, seed, cell_grid) for h in h_list]


def _panels(a: float, width: float):
    n = max(1, int(math.ceil(a / width)))
    b = np.linspace(0.0, a, n + 1)
    x, w = _GL
    lo, hi = b[:-1, None], b[1:, None]
    return (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel(), (0.5 * (hi - lo) * w).ravel()


def _panel_width(model) -> float:
    # |phi| varies on the scale 1 / (support radius) for finite lattice laws
    r = float(getattr(model, "radius", 1.0))
    return min(0.25, 0.5 / max(r, 1.0))


def _abs_integral_1d(f, a: float, width: float) -> float:
    """int_0^a |f| by Gauss-Legendre panels split at the sign changes of a real-valued f.

    |f| has a kink where f crosses zero; splitting there keeps the panel rule
    at full order.  Complex values with a nonzero imaginary part are not split.
    """
    b = np.linspace(0.0, a, max(1, int(math.ceil(a / width))) + 1)
    fb = np.asarray(f(b), complex)
    real = np.abs(fb.imag) <= 1e-12 * np.maximum(np.abs(fb), 1e-300)
    cross = np.nonzero(real[:-1] & real[1:] & (np.sign(fb.real[:-1]) * np.sign(fb.real[1:]) < 0))[0]
    g = lambda u: float(np.real(np.asarray(f(np.array([u])))[0]))
    roots = [optimize.brentq(g, b[i], b[i + 1], xtol=1e-15) for i in cross]
    b = np.unique(np.concatenate([b, roots]))
    x, w = _GL
    lo, hi = b[:-1, None], b[1:, None]
    nodes = (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel()
    weights = (0.5 * (hi - lo) * w).ravel()
    return float(weights @ np.abs(np.asarray(f(nodes))))


def cf_abs_integral(model, a: float, width: Optional[float] = None) -> float:
    """int_{|t|_inf <= a} |phi_X(t)| dt, using |phi(-t)| = |phi(t)|.

    Product laws (a ``cf1`` method) and d = 1 reduce to a one-dimensional
    integral with panels split at the zeros of phi.  Otherwise a tensor of
    Gauss-Legendre panels is used; kinks of |phi| along its zero set inside
    a panel then limit the relative accuracy to roughly 1e-4.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    d = model.d
    try:
        model.cf(np.zeros((1, d)))
    except NotImplementedError as exc:
        raise NotApplicable(f"{model.name} has no characteristic function") from exc
    w = _panel_width(model) if width is None else float(width)
    if hasattr(model, "cf1"):
        return (2.0 * _abs_integral_1d(model.cf1, float(a), w)) ** d
    if d == 1:
        return 2.0 * _abs_integral_1d(lambda u: model.cf(u[:, None]), float(a), w)
    t, wt = _panels(float(a), w)
    t_full = np.concatenate([-t[::-1], t])
    w_full = np.concatenate([wt[::-1], wt])
    n_nodes = len(t) * len(t_full) ** (d - 1)
    if n_nodes > _MAX_NODES:
        raise QuadratureBudgetExceeded(f"{n_nodes} nodes for the characteristic function integral")
    # first coordinate on [0, a], the others on [-a, a]; the half-space doubles
    axes = [t] + [t_full] * (d - 1)
    waxes = [wt] + [w_full] * (d - 1)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    wts = np.prod(np.stack(np.meshgrid(*waxes, indexing="ij"), axis=-1).reshape(-1, d), axis=1)
    total = 0.0
    step = 200_000
    for i in range(0, len(grid), step):
        total += float(wts[i : i + step] @ np.abs(np.asarray(model.cf(grid[i : i + step]))))
    return 2.0 * total


def check_concentration(
    model,
    h_list: Sequence[float],
    a_list: Sequence[float],
    cell_grid=None,
    radius: Optional[int] = None,
    n_samples: int = 200_000,
    seed: int = 0,
) -> list:
    """One ConcentrationCheck per (h, a); Q_X(h) and the integrals are computed once each."""
    if any(not a > 0 for a in a_list) or any(not h > 0 for h in h_list):
        raise ValueError("a and h must be positive")
    d = model.d
    cd = c_d(d)
    Q = concentration_function(model, [float(h) for h in h_list], radius, n_samples, seed, cell_grid)
    integrals = {float(a): cf_abs_integral(model, float(a)) for a in a_list}
    out = []
    desc = model.describe()
    for q in Q:
        for a in a_list:
            a = float(a)
            rhs = cd * max(1.0 / a, q.h) ** d * integrals[a]
            out.append(ConcentrationCheck(desc, q.h, a, q.value, q.error, q.method, rhs, integrals[a], cd, rhs - q.upper))
    return out
