"""Local large deviations of walks with truncated steps.

P(S_n in x + [0, h)^d, max_i |X_i| <= s) is computed along rays x = rho w,
either exactly on Z^d (convolution powers of the step pmf restricted to
|x| <= s, on a box large enough to lose nothing) or by seeded Monte Carlo
with binomial error bars.  Per ray, log P is regressed on rho/s; the slope
is the fitted decay rate -chi and must be negative, and the slope per unit
rho must steepen as s decreases.  The intercept gives a prefactor constant
that is reported as a diagnostic only.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .. import kernels
from ..errors import BudgetExceeded, MonteCarloBudget, NotApplicable
from ..renewal_engine.convolution import convolve_exact, step_table
from ..srt_criteria.trend import SlopeFit, ols_slope
from ..step_models.base import substream
from .lcf import _block_max, is_integer_lattice

__all__ = [
    "LdpCheck",
    "LdpShape",
    "truncated_power",
    "truncated_cell_probabilities",
    "check_local_ldp",
    "ldp_shape_summary",
    "SumConcentration",
    "sums_concentration",
]

_MAX_EXACT_COST = 4e9
_MIN_COUNT = 10
_N_BATCHES = 32


@dataclass(frozen=True)
class LdpCheck:
    model: dict
    n: int
    s: float
    h: float
    ray: Tuple[float, ...]
    rho: Tuple[float, ...]
    prob: Tuple[float, ...]
    stderr: Tuple[float, ...]
    method: str
    fit: Optional[SlopeFit]  # log prob against rho / s
    C_fit: float  # from the intercept: log(s^-d + a_n^-d) + C n / A(s)

    @property
    def slope(self) -> float:
        return self.fit.slope if self.fit is not None else float("nan")

    @property
    def chi_fit(self) -> float:
        return -self.slope

    @property
    def slope_per_rho(self) -> float:
        return self.slope / self.s

    @property
    def negative(self) -> bool:
        return self.fit is not None and self.fit.slope < 0

    def to_json(self):
        return {
            "model": self.model,
            "n": self.n,
            "s": self.s,
            "h": self.h,
            "ray": list(self.ray),
            "rho": list(self.rho),
            "prob": list(self.prob),
            "stderr": list(self.stderr),
            "method": self.method,
            "fit": None if self.fit is None else self.fit.to_json(),
            "chi_fit": self.chi_fit,
            "slope_per_rho": self.slope_per_rho,
            "C_fit": self.C_fit,
            "negative": self.negative,
        }


def _truncated_step(model, s: float) -> np.ndarray:
    Rs = int(math.floor(s))
    p = step_table(model, Rs)
    ax = np.arange(-Rs, Rs + 1)
    r2 = sum(np.meshgrid(*([ax**2] * model.d), indexing="ij"))
    return np.where(r2 <= s * s, p, 0.0)


def truncated_power(model, n: int, s: float, backend=None) -> Tuple[np.ndarray, int]:
    """Sub-probability table of S_n on {|X_i| <= s for all i}, exact on the box of radius n floor(s)."""
    if not is_integer_lattice(model):
        raise NotApplicable("exact truncated powers need a law on Z^d")
    p = _truncated_step(model, s)
    Rs = p.shape[0] // 2
    Rb = max(n * Rs, 0)
    cost = n * float(2 * Rb + 1) ** model.d * float(np.count_nonzero(p))
    if cost > _MAX_EXACT_COST:
        raise BudgetExceeded(f"exact truncated power costs {cost:.2e} operations")
    cur = np.zeros((2 * Rb + 1,) * model.d)
    cur[(Rb,) * model.d] = 1.0
    nz = np.argwhere(p > 0)
    for _ in range(n):
        if len(nz) <= 64:
            cur = kernels.scatter_convolve(cur, nz - Rs, p[tuple(nz.T)], backend=backend)
        else:
            cur = kernels.dense_convolve(cur, p, backend=backend)
    return cur, Rb


def _cell_sums(table: np.ndarray, R: int, lo: np.ndarray, h: float) -> np.ndarray:
    out = np.empty(len(lo))
    n = table.shape[0]
    for i, row in enumerate(lo):
        first = np.ceil(row - 1e-12).astype(np.int64) + R
        last = np.ceil(row + h - 1e-12).astype(np.int64) - 1 + R
        a, b = np.clip(first, 0, n), np.clip(last + 1, 0, n)
        out[i] = float(table[tuple(slice(i0, j0) for i0, j0 in zip(a, b))].sum()) if np.all(b > a) else 0.0
    return out


def _mc_counts(model, n: int, s: float, lo: np.ndarray, h: float, n_paths: int, seed: int, workers: int):
    per = int(math.ceil(n_paths / _N_BATCHES))
    d = model.d

    def batch(b):
        rng = substream(seed, b)
        x = np.asarray(model.sample(per * n, rng), float).reshape(per, n, d)
        keep = np.all(np.linalg.norm(x, axis=2) <= s, axis=1)
        end = x[keep].sum(axis=1)
        inside = np.all((end[:, None, :] >= lo[None]) & (end[:, None, :] < lo[None] + h), axis=2)
        return inside.sum(axis=0).astype(np.int64)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(batch, range(_N_BATCHES)))
    else:
        parts = [batch(b) for b in range(_N_BATCHES)]
    counts = np.zeros(len(lo), dtype=np.int64)
    for c in parts:
        counts += c
    return counts, per * _N_BATCHES


def truncated_cell_probabilities(
    model,
    n: int,
    s: float,
    lo,
    h: float = 1.0,
    method: str = "exact",
    n_paths: int = 200_000,
    seed: Optional[int] = None,
    workers: int = 1,
):
    """P(S_n in lo + [0, h)^d, max |X_i| <= s) for rows of ``lo``: (prob, stderr, counts or None)."""
    lo = np.atleast_2d(np.asarray(lo, float))
    if n == 0:
        # S_0 = 0 lies in lo + [0, h)^d iff -lo is in [0, h)^d
        p = np.all((-lo >= 0) & (-lo < h), axis=1).astype(float)
        return p, np.zeros(len(lo)), None
    if method == "exact":
        table, R = truncated_power(model, n, s)
        return _cell_sums(table, R, lo, h), np.zeros(len(lo)), None
    if method == "mc":
        if seed is None:
            raise ValueError("Monte Carlo needs a seed")
        counts, total = _mc_counts(model, n, s, lo, h, n_paths, seed, workers)
        p = counts / total
        return p, np.sqrt(np.maximum(p * (1 - p), 0.0) / total), counts
    raise ValueError("method must be 'exact' or 'mc'")


def _choose_method(model, n, s, method):
    if method != "auto":
        return method
    if not is_integer_lattice(model):
        return "mc"
    Rs = int(math.floor(s))
    cost = n * float(2 * n * Rs + 1) ** model.d * float(2 * Rs + 1) ** model.d
    return "exact" if cost <= _MAX_EXACT_COST else "mc"


def check_local_ldp(
    model,
    n_list: Sequence[int],
    s_list: Sequence[float],
    x_rays,
    h: float = 1.0,
    rho_over_s: Sequence[float] = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0),
    method: str = "auto",
    n_paths: int = 200_000,
    seed: Optional[int] = 0,
    workers: int = 1,
) -> List[LdpCheck]:
    """One LdpCheck per (n, s, ray) with x = rho w, rho = s * ``rho_over_s``.

    The regression uses the cells with positive probability (at least 10 hits
    for Monte Carlo); MonteCarloBudget is raised when the largest rho has
    fewer than 10 hits.
    """
    rays = np.atleast_2d(np.asarray(x_rays, float))
    rays = rays / np.linalg.norm(rays, axis=1, keepdims=True)
    if rays.shape[1] != model.d:
        raise ValueError("rays must have d coordinates")
    fr = np.asarray(sorted(float(v) for v in rho_over_s))
    A = None
    try:
        A = model.norming()
    except Exception:  # laws without declared tails get no prefactor fit
        A = None
    out = []
    desc = model.describe()
    for n in n_list:
        n = int(n)
        for s in s_list:
            s = float(s)
            m = _choose_method(model, n, s, method)
            rho = s * fr
            lo = (rho[None, :, None] * rays[:, None, :]).reshape(-1, model.d)
            p, se, counts = truncated_cell_probabilities(model, n, s, lo, h, m, n_paths, seed, workers)
            p = p.reshape(len(rays), len(fr))
            se = se.reshape(p.shape)
            if counts is not None:
                counts = counts.reshape(p.shape)
                if np.any(counts[:, -1] < _MIN_COUNT):
                    raise MonteCarloBudget(f"fewer than {_MIN_COUNT} hits at the largest rho (n={n}, s={s})")
            for r in range(len(rays)):
                ok = p[r] > 0 if counts is None else counts[r] >= _MIN_COUNT
                fit = ols_slope(fr[ok], np.log(p[r][ok])) if ok.sum() >= 3 else None
                C = float("nan")
                if fit is not None and A is not None and n > 0:
                    an = float(A.a(n))
                    pref = math.log(s ** -model.d + an ** -model.d)
                    C = (fit.intercept - pref) * float(A(s)) / n
                out.append(
                    LdpCheck(desc, n, s, float(h), tuple(rays[r].tolist()), tuple(rho.tolist()), tuple(p[r].tolist()), tuple(se[r].tolist()), m, fit, C)
                )
    return out


@dataclass(frozen=True)
class LdpShape:
    all_negative: bool
    steepening: bool  # slope per unit rho decreases as s decreases, for every (n, ray)
    min_r2: float
    groups: Dict[str, List[float]]

    def to_json(self):
        return {"all_negative": self.all_negative, "steepening": self.steepening, "min_r2": self.min_r2, "groups": self.groups}


def ldp_shape_summary(checks: Sequence[LdpCheck]) -> LdpShape:
    groups: Dict[str, list] = {}
    for c in checks:
        groups.setdefault(f"n={c.n} ray={list(c.ray)}", []).append((c.s, c.slope_per_rho))
    steep = True
    table = {}
    for key, rows in groups.items():
        rows.sort()
        vals = [v for _, v in rows]
        table[key] = vals
        # larger s must give a shallower (less negative) slope per unit rho
        steep &= all(b > a for a, b in zip(vals, vals[1:]))
    r2 = [c.fit.r2 for c in checks if c.fit is not None]
    return LdpShape(all(c.negative for c in checks), bool(steep), float(min(r2)) if r2 else float("nan"), table)


@dataclass(frozen=True)
class SumConcentration:
    n: int
    h: float
    Q: float
    a_n: float
    scaled: float  # Q a_n^d
    lost_mass: float

    def to_json(self):
        return {"n": self.n, "h": self.h, "Q": self.Q, "a_n": self.a_n, "scaled": self.scaled, "lost_mass": self.lost_mass}


def sums_concentration(model, n_list: Sequence[int], h: float = 1.0, box_radius: Optional[int] = None) -> List[SumConcentration]:
    """Q_{S_n}(h) from exact convolution powers, with the scaled value Q a_n^d (untruncated steps)."""
    if not is_integer_lattice(model):
        raise NotApplicable("exact concentration of S_n needs a law on Z^d")
    n_list = sorted(int(n) for n in n_list)
    if box_radius is None:
        if not hasattr(model, "radius"):
            raise ValueError("give box_radius for laws with unbounded support")
        box_radius = int(math.ceil(model.radius * n_list[-1]))
    tables = convolve_exact(model, n_list[-1], box_radius, keep=n_list)
    A = model.norming()
    m = max(1, int(math.ceil(float(h) - 1e-12)))
    out = []
    for t in tables:
        Q = _block_max(t.values, m)
        an = float(A.a(t.k))
        out.append(SumConcentration(t.k, float(h), Q, an, Q * an ** model.d, t.lost_mass))
    return out
