"""Local limit checks, residue classes and Monte Carlo against exact tables."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import NotApplicable
from .convolution import convolve_exact
from .renewal import mc_window

__all__ = ["LLTReport", "llt_check", "residue_class_check", "ResidueReport", "mc_vs_exact", "AgreementReport"]


def _trend(values: Sequence[float]) -> str:
    v = np.asarray(values, float)
    if len(v) < 2:
        return "insufficient"
    return "decreasing" if np.all(np.diff(v) < 0) else "not_decreasing"


@dataclass(frozen=True)
class LLTReport:
    n_grid: tuple
    sup_gaps: tuple
    argmax: tuple
    q: int
    verdict: str
    box_radius: int
    lost_mass: tuple

    def to_json(self):
        return {
            "n_grid": list(self.n_grid),
            "sup_gaps": list(self.sup_gaps),
            "argmax": [list(a) for a in self.argmax],
            "q": self.q,
            "verdict": self.verdict,
            "box_radius": self.box_radius,
            "lost_mass": list(self.lost_mass),
        }


def _coset_mask(model, n: int, grid: np.ndarray) -> np.ndarray:
    """Points reachable at step n: (K z)_nu = n p (mod q)."""
    lat = model.lattice
    ap = getattr(model, "aperiodicity", None)
    if lat.q == 1 or ap is None:
        return np.ones(grid.shape[:-1], dtype=bool)
    K = np.array(ap.K.entries, dtype=np.int64)
    last = grid @ K[-1]
    return np.mod(last - n * ap.p, lat.q) == 0


def llt_check(model, n_grid: Sequence[int], box_radius: Optional[int] = None, backend=None) -> LLTReport:
    """sup_y |a_n^d P(S_n = y) - q psi(y / a_n)| over the reachable coset, from exact tables.

    For q > 1 only the points reachable at step n are compared, where the
    local density is q times the limit density.
    """
    if getattr(model, "lattice", None) is None:
        raise NotApplicable("llt_check needs a lattice model")
    if model.lattice.nu != model.d:
        raise NotApplicable("only the purely lattice case is checked")
    law = model.limit_law()
    A = model.norming()
    n_grid = sorted(int(n) for n in n_grid)
    n_max = n_grid[-1]
    if box_radius is None:
        sd = math.sqrt(float(np.max(np.linalg.eigvalsh(law.covariance())))) if model.alpha == 2 else 1.0
        reach = getattr(model, "radius", math.inf) * n_max
        box_radius = int(min(reach, math.ceil(8.0 * float(A.a(n_max)) * sd)))
    tabs = convolve_exact(model, n_max, box_radius, keep=n_grid, backend=backend)
    ax = np.arange(-box_radius, box_radius + 1)
    grid = np.stack(np.meshgrid(*([ax] * model.d), indexing="ij"), axis=-1)
    q = model.lattice.q
    gaps, arg, lost = [], [], []
    for tb in tabs:
        a = float(A.a(tb.k))
        mask = _coset_mask(model, tb.k, grid)
        pred = q * law.psi(grid / a)
        diff = np.where(mask, np.abs(a ** model.d * tb.values - pred), 0.0)
        i = np.unravel_index(int(np.argmax(diff)), diff.shape)
        gaps.append(float(diff[i]))
        arg.append(tuple(int(grid[i][j]) for j in range(model.d)))
        lost.append(tb.lost_mass)
    return LLTReport(tuple(n_grid), tuple(gaps), tuple(arg), q, _trend(gaps), int(box_radius), tuple(lost))


@dataclass(frozen=True)
class ResidueReport:
    n_max: int
    q: int
    p: int
    checked: int
    violations: int

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_json(self):
        return {"n_max": self.n_max, "q": self.q, "p": self.p, "checked": self.checked, "violations": self.violations}


def residue_class_check(model, n_max: int, box_radius: int) -> ResidueReport:
    """Every z with F^{*n}(z) > 0 satisfies (K z)_nu = n p (mod q), checked from the tables."""
    tabs = convolve_exact(model, n_max, box_radius)
    ax = np.arange(-box_radius, box_radius + 1)
    grid = np.stack(np.meshgrid(*([ax] * model.d), indexing="ij"), axis=-1)
    ap = getattr(model, "aperiodicity", None)
    checked = violations = 0
    for tb in tabs:
        pos = tb.values > 0
        ok = _coset_mask(model, tb.k, grid)
        checked += int(pos.sum())
        violations += int((pos & ~ok).sum())
    return ResidueReport(n_max, model.lattice.q, 0 if ap is None else int(ap.p), checked, violations)


@dataclass(frozen=True)
class AgreementReport:
    n_list: tuple
    points: np.ndarray
    exact: np.ndarray  # (n_points, n_list)
    mc: np.ndarray
    z: np.ndarray
    n_paths: int
    max_abs_z: float

    @property
    def ok(self) -> bool:
        return bool(self.max_abs_z < 4.0)

    def to_json(self):
        return {
            "n_list": list(self.n_list),
            "points": self.points.tolist(),
            "exact": self.exact.tolist(),
            "mc": self.mc.tolist(),
            "z": self.z.tolist(),
            "n_paths": self.n_paths,
            "max_abs_z": self.max_abs_z,
            "ok": self.ok,
        }


def mc_vs_exact(model, n_list: Sequence[int], points, n_paths: int, seed: int, box_radius: int, workers: int = 1) -> AgreementReport:
    """Hit frequencies of S_n = z against F^{*n}(z) with binomial z-scores.

    The exact value is bracketed by [table, table + lost mass]; the z-score uses
    the nearer end, so truncation can only make the check more lenient by at
    most the certified loss.
    """
    n_list = sorted(int(n) for n in n_list)
    pts = np.atleast_2d(np.asarray(points, dtype=np.int64))
    tabs = {tb.k: tb for tb in convolve_exact(model, n_list[-1], box_radius, keep=n_list)}
    exact = np.stack([tabs[n].at(pts) for n in n_list], axis=1)
    lost = np.array([tabs[n].lost_mass for n in n_list])
    mcw = mc_window(model, pts - 0.5, pts + 0.5, n_list[0], n_list[-1] + 1, n_paths, seed, workers)
    cols = [n - n_list[0] for n in n_list]
    freq = mcw.counts[:, cols] / mcw.n_paths
    lo_dev = freq - (exact + lost[None, :])
    hi_dev = freq - exact
    dev = np.where(lo_dev > 0, lo_dev, np.where(hi_dev < 0, hi_dev, 0.0))
    p = np.clip(exact, 1.0 / mcw.n_paths, 1.0)
    z = dev / np.sqrt(p * (1 - p) / mcw.n_paths)
    return AgreementReport(tuple(n_list), pts, exact, freq, z, mcw.n_paths, float(np.max(np.abs(z))))
